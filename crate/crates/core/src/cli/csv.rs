//! Bit-stable CSV emission: `t,mean,stderr,n_realizations` with 17
//! significant digits, rows in ascending t, LF line endings.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render one series; identical inputs give identical bytes.
pub fn render_csv(series: &TimeSeries) -> String {
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_by(|&a, &b| series.times[a].total_cmp(&series.times[b]));
    let mut out = String::from("t,mean,stderr,n_realizations\n");
    for k in order {
        out.push_str(&fmt(series.times[k]));
        out.push(',');
        out.push_str(&fmt(series.mean[k]));
        out.push(',');
        out.push_str(&fmt(series.stderr[k]));
        out.push(',');
        out.push_str(&series.n_realizations.to_string());
        out.push('\n');
    }
    out
}

pub fn emit_csv(series: &TimeSeries, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(render_csv(series).as_bytes())?;
    Ok(())
}

/// Read a series back; accepts exactly the emitted schema.
pub fn read_csv(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("t,mean,stderr,n_realizations") => {}
        other => {
            return Err(Error::InvalidArgument(format!(
                "{}: expected header 't,mean,stderr,n_realizations', got {other:?}",
                path.display()
            )))
        }
    }
    let mut times = Vec::new();
    let mut mean = Vec::new();
    let mut stderr = Vec::new();
    let mut n_realizations = 1usize;
    for (idx, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "{}: row {}: expected 4 fields, got {}",
                path.display(),
                idx + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "{}: row {}: '{s}' is not a number",
                    path.display(),
                    idx + 2
                ))
            })
        };
        times.push(parse(fields[0])?);
        mean.push(parse(fields[1])?);
        stderr.push(parse(fields[2])?);
        n_realizations = fields[3].parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "{}: row {}: '{}' is not a count",
                path.display(),
                idx + 2,
                fields[3]
            ))
        })?;
    }
    Ok(TimeSeries { times, mean, stderr, n_realizations })
}
