//! Command-line driver. Results go to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::boxloss::{iou_loss, tversky_loss};
use crate::distance::{distance_matrix, nn_stats};
use crate::error::{Error, Result};
use crate::fusion::{first_frame_reps, multi_frame_reps};
use crate::io::{
    format_selection, load_pool, resolve_output_path, save_bench_report, save_selection,
};
use crate::selection::run_selection;
use crate::synthbench::{run_bench, SynthConfig};
use crate::types::{
    BBox, LossParams, Metric, SelectionConfig, Strategy, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_ETA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "activesel",
    version,
    about = "Budgeted diverse sequence selection and box losses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Random,
    Sal,
    Mal,
    Kmal,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Random => Strategy::Random,
            StrategyArg::Sal => Strategy::Sal,
            StrategyArg::Mal => Strategy::Mal,
            StrategyArg::Kmal => Strategy::Kmal,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MetricArg {
    Cosine,
    Euclidean,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Cosine => Metric::Cosine,
            MetricArg::Euclidean => Metric::Euclidean,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RepMode {
    First,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum LossKind {
    Iou,
    Tversky,
    Dice,
    Jaccard,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Select a budgeted subset of a pool.
    Select {
        /// Pool manifest (or a .csv pool).
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "kmal")]
        strategy: StrategyArg,
        #[arg(long)]
        budget: usize,
        #[arg(long, default_value_t = crate::types::DEFAULT_INTERVAL)]
        interval: usize,
        #[arg(long, default_value_t = crate::types::DEFAULT_FRAMES_PER_SEQUENCE)]
        frames: usize,
        #[arg(long, value_enum, default_value = "cosine")]
        metric: MetricArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nearest-neighbor statistics of a pool.
    Stats {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_enum, default_value = "multi")]
        mode: RepMode,
        #[arg(long, default_value_t = crate::types::DEFAULT_INTERVAL)]
        interval: usize,
        #[arg(long, default_value_t = crate::types::DEFAULT_FRAMES_PER_SEQUENCE)]
        frames: usize,
        #[arg(long, value_enum, default_value = "cosine")]
        metric: MetricArg,
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Evaluate a box loss for one predicted / ground-truth pair.
    Loss {
        /// Predicted box as x1,y1,x2,y2.
        #[arg(long, allow_hyphen_values = true)]
        pred: String,
        /// Ground-truth box as x1,y1,x2,y2.
        #[arg(long, allow_hyphen_values = true)]
        gt: String,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        #[arg(long, value_enum, default_value = "tversky")]
        kind: LossKind,
        /// Also print d(loss)/d(x1, y1, x2, y2).
        #[arg(long)]
        grad: bool,
        /// Classification loss to combine with the box loss.
        #[arg(long)]
        cl: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_ETA)]
        eta: f64,
    },
    /// Coverage benchmark on synthetic clustered pools.
    Bench {
        #[arg(long, default_value_t = 10)]
        clusters: usize,
        #[arg(long, default_value_t = 10)]
        budget: usize,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[arg(long, default_value_t = 40)]
        samples_per_cluster: usize,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        outliers: usize,
        /// Base seed for pool generation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_box(s: &str) -> Result<BBox> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse box `{s}`")))?;
    let c: [f64; 4] = parts
        .try_into()
        .map_err(|_| Error::InvalidConfig(format!("box `{s}` needs four values")))?;
    BBox::from_array(c)
}

fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    if hi <= lo {
        return vec![(lo, hi, values.len())];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let upper = if i + 1 == bins {
                hi
            } else {
                lo + width * (i + 1) as f64
            };
            (lo + width * i as f64, upper, c)
        })
        .collect()
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let w = |e: std::io::Error| Error::io("<stdout>", e);
    match command {
        Command::Select {
            manifest,
            strategy,
            budget,
            interval,
            frames,
            metric,
            seed,
            out: out_path,
        } => {
            let pool = load_pool(&manifest)?;
            let config = SelectionConfig::new(strategy.into(), budget, seed)
                .with_interval(interval)
                .with_frames(frames)
                .with_metric(metric.into());
            let result = run_selection(&pool, &config)?;
            match out_path {
                Some(p) => {
                    let p = resolve_output_path(p);
                    save_selection(&result, &config, pool.ids(), &p)?;
                    writeln!(out, "selected\t{}", result.selected.len()).map_err(w)?;
                    writeln!(out, "exhausted\t{}", result.exhausted).map_err(w)?;
                    writeln!(out, "out\t{}", p.display()).map_err(w)?;
                }
                None => out
                    .write_all(format_selection(&result, &config, pool.ids()).as_bytes())
                    .map_err(w)?,
            }
        }
        Command::Stats {
            manifest,
            mode,
            interval,
            frames,
            metric,
            bins,
        } => {
            let pool = load_pool(&manifest)?;
            let reps = match mode {
                RepMode::First => first_frame_reps(&pool),
                RepMode::Multi => multi_frame_reps(&pool, interval, frames)?,
            };
            let m = distance_matrix(&reps.reps, metric.into())?;
            let stats = nn_stats(&m)?;
            let isolated = stats.d.iter().filter(|&&d| d > stats.ave_d).count();
            writeln!(out, "n\t{}", pool.len()).map_err(w)?;
            writeln!(out, "dim\t{}", pool.dim()).map_err(w)?;
            writeln!(out, "ave_d\t{}", stats.ave_d).map_err(w)?;
            writeln!(out, "isolated\t{isolated}").map_err(w)?;
            writeln!(out, "# bin\tlower\tupper\tcount").map_err(w)?;
            for (lo, hi, c) in histogram(&stats.d, bins) {
                writeln!(out, "bin\t{lo}\t{hi}\t{c}").map_err(w)?;
            }
        }
        Command::Loss {
            pred,
            gt,
            alpha,
            beta,
            kind,
            grad,
            cl,
            eta,
        } => {
            let b = parse_box(&pred)?;
            let g = parse_box(&gt)?;
            let (a, bt) = match kind {
                LossKind::Tversky => (alpha, beta),
                LossKind::Dice => (0.5, 0.5),
                LossKind::Iou | LossKind::Jaccard => (1.0, 1.0),
            };
            let params = LossParams::new(a, bt, eta)?;
            let mut value = tversky_loss(&b, &g, &params, grad)?;
            if kind == LossKind::Iou {
                value.value = iou_loss(&b, &g)?.value;
            }
            writeln!(out, "{}", value.value).map_err(w)?;
            if let Some(gr) = value.grad {
                writeln!(out, "grad\t{}\t{}\t{}\t{}", gr[0], gr[1], gr[2], gr[3]).map_err(w)?;
            }
            if let Some(cl) = cl {
                if !cl.is_finite() || cl < 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "classification loss must be finite and non-negative, got {cl}"
                    )));
                }
                let total = crate::boxloss::combine_total_loss(value.value, cl, params.eta());
                writeln!(out, "total\t{total}").map_err(w)?;
            }
        }
        Command::Bench {
            clusters,
            budget,
            seeds,
            samples_per_cluster,
            dim,
            outliers,
            seed,
            out: out_path,
        } => {
            let config = SynthConfig {
                clusters,
                samples_per_cluster,
                dim,
                outliers,
                seed,
                ..SynthConfig::default()
            };
            let seeds: Vec<u64> = (0..seeds).collect();
            let report = run_bench(&config, &[budget], &Strategy::ALL, &seeds)?;
            if let Some(p) = out_path {
                save_bench_report(&report, resolve_output_path(p))?;
            }
            writeln!(
                out,
                "# strategy\tbudget\tseeds_run\tmean_clusters_covered\tcoverage_rate\tmean_outliers_selected"
            )
            .map_err(w)?;
            for s in &report.summaries {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    s.strategy,
                    s.budget,
                    s.seeds_run,
                    s.mean_clusters_covered,
                    s.coverage_rate,
                    s.mean_outliers_selected
                )
                .map_err(w)?;
            }
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidConfig(_)
                | Error::InvalidBox { .. }
                | Error::InvalidLossParam { .. } => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["activesel"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn tversky_example() {
        let (code, out, _) = run_str(&[
            "loss", "--pred", "0,0,2,2", "--gt", "1,1,3,3", "--kind", "tversky", "--alpha", "0.4",
            "--beta", "0.6",
        ]);
        assert_eq!(code, 0);
        assert_eq!(out, "0.75\n");
    }

    #[test]
    fn loss_kinds() {
        let (_, out, _) = run_str(&[
            "loss", "--pred", "0,0,2,2", "--gt", "1,1,3,3", "--kind", "dice",
        ]);
        assert_eq!(out, "0.75\n");
        let (_, out, _) = run_str(&[
            "loss", "--pred", "0,0,2,2", "--gt", "1,1,3,3", "--kind", "iou",
        ]);
        let v: f64 = out.trim().parse().unwrap();
        assert!((v - 6.0 / 7.0).abs() < 1e-15);
        let (_, out, _) = run_str(&[
            "loss", "--pred", "0,0,2,2", "--gt", "1,1,3,3", "--grad", "--cl", "0.01",
        ]);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("grad\t"));
        assert_eq!(lines[2], "total\t1.75");
    }

    #[test]
    fn negative_coordinates() {
        let (code, out, _) = run_str(&["loss", "--pred", "-2,-2,0,0", "--gt", "-1,-1,1,1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "0.75\n");
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["select", "--budget", "3"]).0, EXIT_USAGE);
        assert_eq!(
            run_str(&["loss", "--pred", "0,0,1", "--gt", "0,0,1,1"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            run_str(&["loss", "--pred", "2,0,1,1", "--gt", "0,0,1,1"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn data_errors_exit_two() {
        let (code, _, err) = run_str(&["loss", "--pred", "1,1,1,1", "--gt", "1,1,1,1"]);
        assert_eq!(code, EXIT_DATA);
        assert!(err.contains("degenerate"));
        let (code, _, _) = run_str(&[
            "select",
            "--manifest",
            "/nonexistent/m.toml",
            "--budget",
            "3",
        ]);
        assert_eq!(code, EXIT_DATA);
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.0, 0.5, 1.0, 1.0], 2);
        assert_eq!(h, vec![(0.0, 0.5, 1), (0.5, 1.0, 3)]);
        assert_eq!(histogram(&[2.0, 2.0], 4), vec![(2.0, 2.0, 2)]);
    }
}
