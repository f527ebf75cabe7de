//! `list`, `run` and `plot`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use hybeam::exec::Execution;
use hybeam::experiments::{draw_channel, realization_seed, rms_study_with, run_scenario_with, validate_propositions_with, Scenario, PRESET_NAMES};

use crate::config::{parse_config, Overrides};
use crate::csv_io::{read_rows, write_rows};
use crate::plot::{build_chart, render_svg};
use crate::CliError;

/// Largest tolerated fraction of numerically failed realizations.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "HYBEAM_THREADS";

pub fn cmd_list() -> String {
    let mut out = String::new();
    for s in Scenario::presets() {
        out.push_str(&s.summary());
        out.push('\n');
    }
    out
}

/// Worker policy from `HYBEAM_THREADS` (unset or `0`: all cores).
pub fn execution_from_env(value: Option<&str>) -> Result<Execution, CliError> {
    match value.map(str::trim) {
        None | Some("") => Ok(Execution::Parallel),
        Some(v) => v
            .parse::<usize>()
            .map(Execution::with_threads)
            .map_err(|_| CliError::Config(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
    }
}

#[derive(Clone, Debug)]
pub struct RunArgs {
    /// Preset name or path to a scenario file.
    pub target: String,
    pub overrides: Overrides,
    pub outdir: PathBuf,
    pub dump_channels: bool,
    pub validate: bool,
    pub exec: Execution,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub csv_files: Vec<PathBuf>,
    pub validation_files: Vec<PathBuf>,
}

fn resolve(target: &str) -> Result<Vec<Scenario>, CliError> {
    if let Some(s) = Scenario::preset(target) {
        return Ok(vec![s]);
    }
    let path = Path::new(target);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        return parse_config(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    Err(CliError::Config(format!(
        "{target:?} is neither a preset ({}) nor a readable scenario file",
        PRESET_NAMES.join(", ")
    )))
}

fn create_file(path: &Path) -> Result<BufWriter<fs::File>, CliError> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Run every scenario named by `args.target` and write its CSV.
///
/// All scenarios are checked before any simulation starts. A scenario whose
/// failed-realization fraction exceeds [`MAX_FAILURE_FRACTION`] still gets
/// its CSV, then the run stops with [`CliError::Numerical`].
pub fn cmd_run(args: &RunArgs, log: &mut dyn Write) -> Result<RunOutput, CliError> {
    let scenarios = resolve(&args.target)?
        .into_iter()
        .map(|s| args.overrides.apply(s))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(&args.outdir)?;
    let mut out = RunOutput::default();

    for s in &scenarios {
        writeln!(log, "running {}", s.summary())?;
        let mut rows = Vec::new();
        let mut failure = None;
        if !s.schemes.is_empty() {
            let run = run_scenario_with(s, args.exec)?;
            writeln!(
                log,
                "  {}/{} realizations used",
                run.realizations_used,
                run.realizations_used + run.failed_realizations
            )?;
            if run.failure_fraction() > MAX_FAILURE_FRACTION || run.realizations_used == 0 {
                let first = run
                    .first_failure
                    .as_ref()
                    .map(|(r, e)| format!("; first at realization {r}: {e}"))
                    .unwrap_or_default();
                failure = Some(format!(
                    "scenario {}: {} of {} realizations failed{first}",
                    s.name, run.failed_realizations, s.realizations
                ));
            }
            rows.extend(run.rows);
        }
        if !s.antenna_grid.is_empty() {
            rows.extend(rms_study_with(&s.antenna_grid, s, args.exec)?);
        }
        let csv_path = args.outdir.join(format!("{}.csv", s.name));
        let mut w = create_file(&csv_path)?;
        write_rows(&mut w, &rows)?;
        w.flush()?;
        writeln!(log, "  wrote {} ({} rows)", csv_path.display(), rows.len())?;
        out.csv_files.push(csv_path);

        if args.dump_channels {
            let dir = args.outdir.join(format!("{}_channels", s.name));
            fs::create_dir_all(&dir)?;
            for r in 0..s.realizations {
                let ch = draw_channel(s, r)?;
                let mut w = create_file(&dir.join(format!("r{r:05}.txt")))?;
                ch.write_dump(&mut w, realization_seed(s.master_seed, r), s.model.name())?;
                w.flush()?;
            }
            writeln!(log, "  dumped {} channels to {}", s.realizations, dir.display())?;
        }

        if args.validate {
            let report = validate_propositions_with(s, args.exec)?;
            let text = format!("{report}\n");
            let path = args.outdir.join(format!("{}_validation.txt", s.name));
            fs::write(&path, &text)?;
            log.write_all(text.as_bytes())?;
            writeln!(log, "  wrote {}", path.display())?;
            out.validation_files.push(path);
        }

        if let Some(msg) = failure {
            return Err(CliError::Numerical(msg));
        }
    }
    Ok(out)
}

/// Default plot path: `<csv stem>_<metric>.svg` next to the CSV.
pub fn default_plot_path(csv: &Path, metric: &str) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let tag: String = metric
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    csv.with_file_name(format!("{stem}_{tag}.svg"))
}

pub fn cmd_plot(csv: &Path, metric: &str, schemes: &[String], out: Option<&Path>) -> Result<PathBuf, CliError> {
    let file = fs::File::open(csv)?;
    let rows = read_rows(file)?;
    let chart = build_chart(&rows, metric, schemes)?;
    let path = out.map(Path::to_path_buf).unwrap_or_else(|| default_plot_path(csv, metric));
    fs::write(&path, render_svg(&chart))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_has_every_preset_with_dimensions() {
        let text = cmd_list();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        for (line, name) in lines.iter().zip(PRESET_NAMES) {
            assert!(line.starts_with(name));
            for key in ["M=", "U=", "L=", "K="] {
                assert!(line.contains(key), "{line}");
            }
        }
        assert_eq!(text, cmd_list());
    }

    #[test]
    fn thread_env_parsing() {
        assert_eq!(execution_from_env(None).unwrap(), Execution::Parallel);
        assert_eq!(execution_from_env(Some("1")).unwrap(), Execution::Sequential);
        assert_eq!(execution_from_env(Some("4")).unwrap(), Execution::ParallelWith { threads: 4 });
        assert_eq!(execution_from_env(Some("x")).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_target() {
        let e = resolve("no-such-scenario").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("fig2"));
    }

    #[test]
    fn plot_path() {
        let p = default_plot_path(Path::new("out/fig5.csv"), "rms_mean[M=100]");
        assert_eq!(p, Path::new("out/fig5_rms_mean_M_100_.svg"));
    }
}
