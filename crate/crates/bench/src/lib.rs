//! Criterion benchmarks for the simulator and the cut planner; see `benches/`.
