//! CSV import/export. Floats are written with 17 significant digits and LF
//! line endings so identical inputs give byte-identical files.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::estimator::VolEstimateSeries;
use crate::models::{Observations, Path};

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Header `t,x,v`, one row per fine-grid point.
pub fn write_path<W: Write>(path: &Path, w: W) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["t", "x", "v"]).map_err(csv_err)?;
    for (k, (x, v)) in path.x.iter().zip(&path.v).enumerate() {
        wr.write_record([fmt_f64(k as f64 * path.dt_fine), fmt_f64(*x), fmt_f64(*v)])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Header `t,x`.
pub fn write_observations<W: Write>(obs: &Observations, w: W) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["t", "x"]).map_err(csv_err)?;
    for (i, x) in obs.x_obs.iter().enumerate() {
        wr.write_record([fmt_f64(i as f64 * obs.delta_n), fmt_f64(*x)])
            .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Header `t,sigma_p_hat,sigma_hat,ci_lo,ci_hi` plus `sigma_true,rel_err`
/// when a truth series is given. CI bounds are on the `sigma` scale and left
/// empty when absent.
pub fn write_series<W: Write>(
    series: &VolEstimateSeries,
    truth: Option<&[f64]>,
    w: W,
) -> Result<()> {
    let mut wr = writer(w);
    let mut header = vec!["t", "sigma_p_hat", "sigma_hat", "ci_lo", "ci_hi"];
    if truth.is_some() {
        header.extend(["sigma_true", "rel_err"]);
    }
    wr.write_record(&header).map_err(csv_err)?;
    for i in 0..series.len() {
        let (lo, hi) = match &series.ci {
            Some(ci) => (fmt_f64(ci[i].0), fmt_f64(ci[i].1)),
            None => (String::new(), String::new()),
        };
        let mut row = vec![
            fmt_f64(series.times[i]),
            fmt_f64(series.sigma_p_hat[i]),
            fmt_f64(series.sigma_hat[i]),
            lo,
            hi,
        ];
        if let Some(tr) = truth {
            let s = tr[i];
            row.push(fmt_f64(s));
            row.push(if s > 0.0 {
                fmt_f64((series.sigma_hat[i] - s).abs() / s)
            } else {
                String::new()
            });
        }
        wr.write_record(&row).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn read_columns<R: Read>(r: R, want: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let idx = want
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == *name)
                .ok_or_else(|| Error::Io(format!("missing column `{name}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); want.len()];
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        for (c, &j) in idx.iter().enumerate() {
            let field = rec.get(j).unwrap_or("").trim();
            let v: f64 = field.parse().map_err(|_| {
                Error::Io(format!("row {}: bad number `{field}` in `{}`", line + 2, want[c]))
            })?;
            cols[c].push(v);
        }
    }
    Ok(cols)
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::Io("need at least two rows".into()));
    }
    let step = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    for (i, ti) in t.iter().enumerate() {
        if (ti - t[0] - i as f64 * step).abs() > 1e-6 * step {
            return Err(Error::Io(format!("time column is not uniformly spaced at row {}", i + 2)));
        }
    }
    Ok(step)
}

/// Reads a `t,x` file (extra columns ignored); times must be uniform from 0.
pub fn read_observations<R: Read>(r: R) -> Result<Observations> {
    let mut cols = read_columns(r, &["t", "x"])?;
    let step = uniform_step(&cols[0])?;
    Observations::new(step, std::mem::take(&mut cols[1]))
}

/// Reads a `t,x,v` fine-grid path.
pub fn read_path<R: Read>(r: R) -> Result<Path> {
    let mut cols = read_columns(r, &["t", "x", "v"])?;
    let dt_fine = uniform_step(&cols[0])?;
    let t_end = *cols[0].last().unwrap();
    Ok(Path {
        dt_fine,
        t_end,
        x: std::mem::take(&mut cols[1]),
        v: std::mem::take(&mut cols[2]),
        clamped_steps: 0,
    })
}
