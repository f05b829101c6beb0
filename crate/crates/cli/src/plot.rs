//! Two-column plot data from result rows.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use thiserror::Error;

use crate::runner::ResultRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum XAxis {
    /// `n` itself.
    N,
    /// `log n`.
    Logn,
    /// `log(n)^{1/2 − κ}`.
    LognPow,
}

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("no rows to plot")]
    Empty,
    #[error("statistic `{0}` does not occur in the rows")]
    MissingStatistic(String),
    #[error("log abscissa needs n >= 1, got n = {0}")]
    NonPositive(u32),
    #[error("kappa = {0} outside (0, 1/2)")]
    Kappa(f64),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// `log(n)^{1/2 − κ}`.
pub fn log_pow(n: u32, kappa: f64) -> f64 {
    (n as f64).ln().powf(0.5 - kappa)
}

/// `(x, value)` pairs for statistic `y`, sorted by `n`.
pub fn emit_plot_data(rows: &[ResultRow], x: XAxis, y: &str, kappa: f64) -> Result<Vec<(f64, f64)>, PlotError> {
    if rows.is_empty() {
        return Err(PlotError::Empty);
    }
    if x == XAxis::LognPow && !(kappa > 0.0 && kappa < 0.5) {
        return Err(PlotError::Kappa(kappa));
    }
    let mut picked: Vec<&ResultRow> = rows.iter().filter(|r| r.statistic == y).collect();
    if picked.is_empty() {
        return Err(PlotError::MissingStatistic(y.into()));
    }
    picked.sort_by_key(|r| r.n);
    picked
        .into_iter()
        .map(|r| {
            let abscissa = match x {
                XAxis::N => r.n as f64,
                _ if r.n == 0 => return Err(PlotError::NonPositive(r.n)),
                XAxis::Logn => (r.n as f64).ln(),
                XAxis::LognPow => log_pow(r.n, kappa),
            };
            Ok((abscissa, r.value))
        })
        .collect()
}

pub fn write_plot_data(path: &Path, x: XAxis, y: &str, points: &[(f64, f64)]) -> Result<(), PlotError> {
    let header = match x {
        XAxis::N => "n",
        XAxis::Logn => "log_n",
        XAxis::LognPow => "log_n_pow",
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{header},{y}")?;
    for (a, b) in points {
        writeln!(f, "{a:?},{b:?}")?;
    }
    f.flush()?;
    Ok(())
}
