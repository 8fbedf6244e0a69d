#!/usr/bin/env python3
"""Write the UCI optdigits 8x8 test set (1797 samples) as data/digits.csv.

Each row holds 64 pixel counts in 0..=16 followed by the class label.
The copy shipped inside scikit-learn is used so no network access is needed.
"""
import gzip
import os
import sys

import sklearn

src = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data", "digits.csv.gz")
dst = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data", "digits.csv")

with gzip.open(src, "rt") as fin, open(dst, "w") as fout:
    for line in fin:
        line = line.strip()
        if line:
            fout.write(line + "\n")
