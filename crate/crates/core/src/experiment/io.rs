//! Result files.
//!
//! * `sweep.csv`: columns `channel,n,theta_actual,p,theta_bar,delta_theta,mode,shots,seed`,
//!   optionally preceded by `# key=value` lines describing the run.
//! * `fits.json`: array of `{channel, n, theta_actual, k1, k2, k3, r_squared, window, converged}`.
//! * `fig2_<channel>.csv`, `fig3.csv`, `fig4.csv`: figure-ready tables.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::fit::{n_sweep_summary, FitRecord};
use super::sweep::SweepRow;
use crate::channels::ChannelKind;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "channel,n,theta_actual,p,theta_bar,delta_theta,mode,shots,seed";

/// Writes rows as CSV, preceded by one `# key=value` line per preamble entry.
pub fn write_rows_csv<W: Write>(
    mut out: W,
    rows: &[SweepRow],
    preamble: &[(String, String)],
) -> Result<()> {
    let mut text = String::new();
    for (k, v) in preamble {
        text.push_str(&format!("# {k}={v}\n"));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<csv>", e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn rows_to_csv_string(rows: &[SweepRow], preamble: &[(String, String)]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows_csv(&mut buf, rows, preamble)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Reads rows back, skipping `#` comment lines.
pub fn read_rows_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Parse {
            line: reader.position().line().max(1) as usize,
            message: format!("expected header `{CSV_HEADER}`"),
        });
    }
    reader
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn read_rows_file(path: &Path) -> Result<Vec<SweepRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_rows_csv(file)
}

pub fn fits_to_json(fits: &[FitRecord]) -> Result<String> {
    Ok(serde_json::to_string_pretty(fits)? + "\n")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `sweep.csv` and `fits.json` into `dir`, returning their paths.
pub fn emit_results(
    rows: &[SweepRow],
    fits: &[FitRecord],
    preamble: &[(String, String)],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join("sweep.csv");
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_rows_csv(BufWriter::new(file), rows, preamble)?;
    let json_path = dir.join("fits.json");
    write_file(&json_path, &fits_to_json(fits)?)?;
    Ok(vec![csv_path, json_path])
}

fn sorted_unique(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values
}

/// Per-panel data files: θ̄ and Δθ against p per channel, fitted curves,
/// and the n-dependence at fixed p. Files whose data is absent are skipped.
pub fn write_figure_data(
    rows: &[SweepRow],
    fits: &[FitRecord],
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    for kind in ChannelKind::ALL {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.channel == kind).collect();
        if mine.is_empty() {
            continue;
        }
        let mut ns: Vec<usize> = mine.iter().map(|r| r.n).collect();
        ns.sort_unstable();
        ns.dedup();
        let thetas = sorted_unique(mine.iter().map(|r| r.theta_actual).collect());
        let ps = sorted_unique(mine.iter().map(|r| r.p).collect());
        for &n in &ns {
            let mut text = String::from("p");
            for t in &thetas {
                text.push_str(&format!(",theta_bar_{t},delta_theta_{t}"));
            }
            text.push('\n');
            for &p in &ps {
                text.push_str(&p.to_string());
                for &t in &thetas {
                    match mine
                        .iter()
                        .find(|r| r.n == n && r.theta_actual == t && r.p == p)
                    {
                        Some(r) => text.push_str(&format!(",{},{}", r.theta_bar, r.delta_theta)),
                        None => text.push_str(",,"),
                    }
                }
                text.push('\n');
            }
            let name = if ns.len() == 1 {
                format!("fig2_{kind}.csv")
            } else {
                format!("fig2_{kind}_n{n}.csv")
            };
            let path = dir.join(name);
            write_file(&path, &text)?;
            written.push(path);
        }
    }

    if !fits.is_empty() {
        let mut text = String::from("channel,n,theta_actual,p,delta_theta,fitted\n");
        for fit in fits {
            let result = super::fit::FitResult {
                k1: fit.k1,
                k2: fit.k2,
                k3: fit.k3,
                r_squared: fit.r_squared,
                window: (fit.window[0], fit.window[1]),
                iterations: 0,
                converged: fit.converged,
            };
            for r in rows.iter().filter(|r| {
                r.channel == fit.channel
                    && r.n == fit.n
                    && r.theta_actual == fit.theta_actual
                    && r.p >= fit.window[0]
                    && r.p <= fit.window[1]
            }) {
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.channel,
                    r.n,
                    r.theta_actual,
                    r.p,
                    r.delta_theta,
                    result.model(r.p)
                ));
            }
        }
        let path = dir.join("fig3.csv");
        write_file(&path, &text)?;
        written.push(path);
    }

    if let Ok(summaries) = n_sweep_summary(rows) {
        let mut text = String::from(
            "channel,theta_actual,p,n,theta_bar,delta_theta,theta_bar_linear,delta_theta_linear\n",
        );
        for s in &summaries {
            for r in rows.iter().filter(|r| {
                r.channel == s.channel && r.theta_actual == s.theta_actual && r.p == s.p
            }) {
                let n = r.n as f64;
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.channel,
                    r.theta_actual,
                    r.p,
                    r.n,
                    r.theta_bar,
                    r.delta_theta,
                    s.theta_bar.at(n),
                    s.delta_theta.at(n)
                ));
            }
        }
        let path = dir.join("fig4.csv");
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}
