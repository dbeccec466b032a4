//! Data files. Numbers are written as the shortest decimal that parses back to
//! the same `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use sampled_sde::{ErrorStats, RateFit};

use crate::config::Format;
use crate::{CliError, Result};

pub const TIME_SERIES_HEADER: [&str; 7] = [
    "t",
    "mean_resid",
    "stderr",
    "lln_moment",
    "clt_moment",
    "mu",
    "xi2",
];

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn writer(path: &Path, format: Format) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_writer(file))
}

fn reader(path: &Path, format: Format) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .from_path(path)
        .map_err(|e| csv_err(path, e))
}

fn csv_err(path: &Path, source: csv::Error) -> CliError {
    CliError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_rows<I, R>(path: &Path, format: Format, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = writer(path, format)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row per reported time point. `mu` and `xi2` must be sampled at
/// `stats.times`.
pub fn write_time_series(
    path: &Path,
    format: Format,
    stats: &ErrorStats,
    mu: &[f64],
    xi2: &[f64],
) -> Result<()> {
    let rows = (0..stats.times.len()).map(|k| {
        [
            stats.times[k],
            stats.mean_resid[k],
            stats.stderr[k],
            stats.lln_moment[k],
            stats.clt_moment[k],
            mu[k],
            xi2[k],
        ]
        .map(num)
    });
    write_rows(path, format, &TIME_SERIES_HEADER, rows)
}

/// Columns of a time-series file in header order.
pub fn read_time_series(path: &Path, format: Format) -> Result<Vec<[f64; 7]>> {
    let mut r = reader(path, format)?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(TIME_SERIES_HEADER) {
        return Err(CliError::config(
            "time series",
            format!("unexpected header {header:?}"),
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let mut row = [0.0; 7];
        for (slot, field) in row.iter_mut().zip(rec.iter()) {
            *slot = parse_num(path, field)?;
        }
        out.push(row);
    }
    Ok(out)
}

fn parse_num(path: &Path, field: &str) -> Result<f64> {
    field.parse().map_err(|_| {
        CliError::config(
            path.display().to_string(),
            format!("`{field}` is not a number"),
        )
    })
}

/// Run parameters and sup/min statistics of one `simulate` run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub model: String,
    pub reference: String,
    pub x0: f64,
    pub eps: f64,
    pub delta: f64,
    pub c: f64,
    pub horizon: f64,
    pub steps_per_sample: usize,
    pub n_paths: usize,
    pub p: u32,
    pub seed: u64,
    pub sup_mean_resid_abs: f64,
    pub min_mean_resid_abs: f64,
    pub sup_lln: f64,
    pub sup_clt: f64,
}

impl Summary {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("model", self.model.clone()),
            ("reference", self.reference.clone()),
            ("x0", num(self.x0)),
            ("eps", num(self.eps)),
            ("delta", num(self.delta)),
            ("c", num(self.c)),
            ("horizon", num(self.horizon)),
            ("steps_per_sample", self.steps_per_sample.to_string()),
            ("n_paths", self.n_paths.to_string()),
            ("p", self.p.to_string()),
            ("seed", self.seed.to_string()),
            ("sup_mean_resid_abs", num(self.sup_mean_resid_abs)),
            ("min_mean_resid_abs", num(self.min_mean_resid_abs)),
            ("sup_lln", num(self.sup_lln)),
            ("sup_clt", num(self.sup_clt)),
        ]
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        write_rows(
            path,
            format,
            &["key", "value"],
            self.fields().into_iter().map(|(k, v)| [k.to_string(), v]),
        )
    }

    pub fn read(path: &Path, format: Format) -> Result<Summary> {
        let mut r = reader(path, format)?;
        let mut map = HashMap::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_err(path, e))?;
            map.insert(rec[0].to_string(), rec[1].to_string());
        }
        let get = |k: &str| {
            map.get(k).cloned().ok_or_else(|| {
                CliError::config(path.display().to_string(), format!("missing key `{k}`"))
            })
        };
        let real = |k: &str| parse_num(path, &get(k)?);
        let int = |k: &str| -> Result<u64> {
            let v = get(k)?;
            v.parse().map_err(|_| {
                CliError::config(
                    path.display().to_string(),
                    format!("`{v}` is not an integer"),
                )
            })
        };
        Ok(Summary {
            model: get("model")?,
            reference: get("reference")?,
            x0: real("x0")?,
            eps: real("eps")?,
            delta: real("delta")?,
            c: real("c")?,
            horizon: real("horizon")?,
            steps_per_sample: int("steps_per_sample")? as usize,
            n_paths: int("n_paths")? as usize,
            p: int("p")? as u32,
            seed: int("seed")?,
            sup_mean_resid_abs: real("sup_mean_resid_abs")?,
            min_mean_resid_abs: real("min_mean_resid_abs")?,
            sup_lln: real("sup_lln")?,
            sup_clt: real("sup_clt")?,
        })
    }
}

/// `run.csv` becomes `run.summary.csv`.
pub fn summary_path(series: &Path, format: Format) -> PathBuf {
    let stem = series
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    series.with_file_name(format!("{stem}.summary.{}", format.extension()))
}

/// Plot data for one `(x0, ε)` panel: the mean residual and its standard error
/// over time.
pub fn write_plot(path: &Path, format: Format, stats: &ErrorStats) -> Result<()> {
    let rows = (0..stats.times.len())
        .map(|k| [stats.times[k], stats.mean_resid[k], stats.stderr[k]].map(num));
    write_rows(path, format, &["t", "mean_resid", "stderr"], rows)
}

/// File name of a plot panel, e.g. `example1_x0=-0.07_eps=0.03125.csv`.
pub fn plot_file_name(model: &str, x0: f64, eps: f64, format: Format) -> String {
    format!(
        "{model}_x0={}_eps={}.{}",
        num(x0),
        num(eps),
        format.extension()
    )
}

/// One row per rung: ε, δ and the functional value.
pub fn write_rates(path: &Path, format: Format, deltas: &[f64], fit: &RateFit) -> Result<()> {
    let rows = fit
        .points
        .iter()
        .zip(deltas)
        .map(|(&(eps, err), &delta)| [eps, delta, err].map(num));
    write_rows(path, format, &["eps", "delta", "error"], rows)
}
