use std::fmt::Write as _;
use std::io::{ErrorKind, Write as _};

use anyhow::{anyhow, bail, Context, Result};
use qcut_core::circuit::{AnsatzOptions, Circuit};
use qcut_core::cutplan::{cut_circuit, to_dot, validate, PlanDocument};
use qcut_core::data::{self, Dataset};
use qcut_core::hqnn::{Architecture, HybridModel, ModelError, TrainConfig, Trainer, TrainingRecord};
use qcut_core::profiler::FlopsTable;
use qcut_core::verify::{self, VerifyOptions};
use qcut_core::{SimError, Simulator};

use crate::args::{PlanArgs, ProfileArgs, TrainArgs, VerifyArgs};
use crate::config::{DatasetKind, ExperimentConfig};
use crate::output::write_atomic;
use crate::plot::{accuracy_chart, Series};

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

pub fn plan(args: &PlanArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let circuit = match &args.circuit {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Circuit::from_text(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => AnsatzOptions::new(cfg.n, cfg.layers, cfg.encoder).build()?,
    };
    let n = circuit.num_wires();
    let m = if cfg.m == 0 { n } else { cfg.m };
    let (plan, graph) = cut_circuit(&circuit, m)?;
    let graph = graph.with_boundary(cfg.boundary);
    let violations = validate(&graph, m);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        bail!("generated plan is invalid:\n  {}", list.join("\n  "));
    }

    let tag = format!("{n}-{m}");
    let json_path = cfg.output.join(format!("plan_{tag}.json"));
    write_atomic(&json_path, &PlanDocument::new(&plan, &graph).to_json())?;
    let mut text = format!(
        "{tag}: {} cuts, {} subcircuits, widest {} qubits, {} links\n",
        plan.cuts.len(),
        graph.num_subcircuits(),
        graph.max_width(),
        graph.links.len()
    );
    for (k, sub) in graph.subcircuits.iter().enumerate() {
        let _ = writeln!(
            text,
            "  S{k}: wires {:?}, {} gates, {} params",
            sub.wire_map,
            sub.circuit.num_gates(),
            sub.circuit.num_params()
        );
    }
    let _ = writeln!(text, "wrote {}", json_path.display());
    if args.dot {
        let dot_path = cfg.output.join(format!("plan_{tag}.dot"));
        write_atomic(&dot_path, &to_dot(&graph))?;
        let _ = writeln!(text, "wrote {}", dot_path.display());
    }
    emit(&text)
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let ds = match cfg.dataset {
        DatasetKind::Digits => data::load_digits(&cfg.digits_csv)?,
        DatasetKind::Mnist => {
            let (Some(images), Some(labels)) = (&cfg.mnist_images, &cfg.mnist_labels) else {
                bail!("mnist needs --mnist-images and --mnist-labels");
            };
            data::load_mnist(images, labels)?
        }
    };
    Ok(match cfg.subsample {
        Some(total) => data::subsample(&ds, total, 0),
        None => ds,
    })
}

fn build_model(cfg: &ExperimentConfig, features: usize, seed: u64, sim: Simulator) -> Result<HybridModel> {
    let mut arch = Architecture::new(features, cfg.n, cfg.device_qubits());
    arch.layers = cfg.layers;
    arch.encoding = cfg.encoder;
    arch.boundary = cfg.boundary;
    HybridModel::new(arch, seed, sim).map_err(|e| match e {
        ModelError::Simulation(SimError::Capacity { qubits, max }) => anyhow!(
            "the uncut circuit needs {qubits} qubits but the simulator is capped at {max}; \
             cut it with --m <= {max}, or raise {} if memory allows",
            qcut_core::simulator::MAX_QUBITS_ENV
        ),
        other => other.into(),
    })
}

/// Runs every seed of one configuration; writes one curve CSV per seed.
fn train_configuration(
    cfg: &ExperimentConfig,
    ds: &Dataset,
    args: &TrainArgs,
) -> Result<Vec<TrainingRecord>> {
    let sim = Simulator::from_env();
    let tag = cfg.tag();
    let mut records = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let (train, val) = data::split(ds, cfg.split_ratio, seed)?;
        let mut model = build_model(cfg, ds.num_features(), seed, sim)?;
        let tc = TrainConfig {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            seed,
        };
        let mut trainer = Trainer::new(&model, tc)?;
        let record = trainer.fit_with(&mut model, &train, &val, |e| {
            if args.verbose {
                eprintln!(
                    "[{tag} seed {seed}] epoch {}/{}: loss {:.4} acc {:.4} | val loss {:.4} acc {:.4}",
                    e.epoch, tc.epochs, e.train_loss, e.train_accuracy, e.val_loss, e.val_accuracy
                );
            }
        })?;
        let last = record.final_metrics().expect("at least one epoch");
        eprintln!(
            "[{tag} seed {seed}] final train acc {:.4}, val acc {:.4}",
            last.train_accuracy, last.val_accuracy
        );
        write_atomic(&cfg.output.join(format!("curves_{tag}_{seed}.csv")), &record.to_csv())?;
        if args.checkpoints {
            let ckpt = model.checkpoint(seed, Some(trainer.optimizer()));
            write_atomic(&cfg.output.join(format!("checkpoint_{tag}_{seed}.json")), &ckpt.to_json())?;
        }
        records.push(record);
    }
    Ok(records)
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub const SUMMARY_HEADER: &str = "config,n,m,seeds,epochs,val_accuracy_mean,val_accuracy_std,train_accuracy_mean,train_accuracy_std,val_loss_mean,val_loss_std,train_loss_mean,train_loss_std";

fn summary_row(cfg: &ExperimentConfig, records: &[TrainingRecord]) -> String {
    let finals: Vec<_> = records.iter().filter_map(TrainingRecord::final_metrics).collect();
    let stat = |f: fn(&qcut_core::hqnn::EpochMetrics) -> f64| {
        mean_std(&finals.iter().map(|e| f(e)).collect::<Vec<_>>())
    };
    let cols = [
        stat(|e| e.val_accuracy),
        stat(|e| e.train_accuracy),
        stat(|e| e.val_loss),
        stat(|e| e.train_loss),
    ];
    let seeds: Vec<String> = cfg.seeds.iter().map(ToString::to_string).collect();
    let mut row = format!("{},{},{},{},{}", cfg.tag(), cfg.n, cfg.m, seeds.join(" "), cfg.epochs);
    for (mean, std) in cols {
        let _ = write!(row, ",{mean:.6},{std:.6}");
    }
    row
}

/// Per-epoch mean over seeds of one metric.
fn mean_curve(records: &[TrainingRecord], f: fn(&qcut_core::hqnn::EpochMetrics) -> f64) -> Vec<f64> {
    let epochs = records.iter().map(|r| r.epochs.len()).min().unwrap_or(0);
    (0..epochs)
        .map(|i| records.iter().map(|r| f(&r.epochs[i])).sum::<f64>() / records.len() as f64)
        .collect()
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let ds = load_dataset(&cfg)?;
    let mut runs = vec![(cfg.clone(), train_configuration(&cfg, &ds, args)?)];
    if args.compare && cfg.m != 0 {
        let original = ExperimentConfig { m: 0, ..cfg.clone() };
        let records = train_configuration(&original, &ds, args)?;
        runs.push((original, records));
    }

    let mut summary = format!("{SUMMARY_HEADER}\n");
    for (c, records) in &runs {
        summary.push_str(&summary_row(c, records));
        summary.push('\n');
    }
    write_atomic(&cfg.output.join("summary.csv"), &summary)?;
    let mut text = summary;

    if let [(cut_cfg, cut), (orig_cfg, orig)] = runs.as_slice() {
        let acc = |r: &[TrainingRecord]| {
            mean_std(&r.iter().filter_map(|x| x.final_metrics().map(|e| e.val_accuracy)).collect::<Vec<_>>()).0
        };
        let (a, b) = (acc(cut), acc(orig));
        let _ = writeln!(
            text,
            "mean validation accuracy: {} {:.4} vs {} {:.4} ({:+.2} percentage points)",
            cut_cfg.tag(),
            a,
            orig_cfg.tag(),
            b,
            100.0 * (a - b)
        );
    }

    if args.plot {
        let colors = ["#d62728", "#1f77b4"];
        let curves: Vec<(String, Vec<f64>, Vec<f64>)> = runs
            .iter()
            .map(|(c, r)| {
                (
                    c.tag(),
                    mean_curve(r, |e| e.train_accuracy),
                    mean_curve(r, |e| e.val_accuracy),
                )
            })
            .collect();
        let labels: Vec<(String, String)> = curves
            .iter()
            .map(|(t, _, _)| (format!("{t} train"), format!("{t} validation")))
            .collect();
        let mut series = Vec::new();
        for (i, (_, tr, va)) in curves.iter().enumerate() {
            let color = colors[i % colors.len()];
            series.push(Series { label: &labels[i].0, values: tr, color, dashed: true });
            series.push(Series { label: &labels[i].1, values: va, color, dashed: false });
        }
        let title = format!("{} accuracy, mean over {} seeds", cfg.tag(), cfg.seeds.len());
        let path = cfg.output.join(format!("curves_{}.svg", cfg.tag()));
        write_atomic(&path, &accuracy_chart(&title, &series))?;
        let _ = writeln!(text, "wrote {}", path.display());
    }
    emit(&text)
}

pub fn profile(args: &ProfileArgs) -> Result<()> {
    if let Some(&n) = args.qubits.iter().find(|&&n| n < 2) {
        bail!("circuit sizes must be at least 2 qubits, got {n}");
    }
    if let Some(&m) = args.devices.iter().find(|&&m| m < 2) {
        bail!("device sizes must be at least 2 qubits, got {m}");
    }
    let table = FlopsTable::build(&args.qubits, &args.devices, args.layers)?;
    let csv = table.to_csv();
    if let Some(dir) = &args.out {
        write_atomic(&dir.join("flops.csv"), &csv)?;
    }
    emit(&csv)
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let options = VerifyOptions {
        oracle_cases: args.oracle_cases,
        gradient_cases: args.gradient_cases,
        seed: args.seed,
        ..VerifyOptions::default()
    };
    let report = verify::run_all(&Simulator::from_env(), &options);
    emit(&report.to_text())?;
    if !report.passed() {
        bail!("verification failed");
    }
    Ok(())
}

