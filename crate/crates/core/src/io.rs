//! Solution files: a CSV grid plus a JSON sidecar sharing a path prefix.
//!
//! CSV floats are written with 17 significant digits (`{:.16e}`), which
//! round-trips every `f64` exactly. JSON floats use the shortest
//! representation that round-trips.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::{
    AnnulusProblem, BoundaryHits, GridPoint, InvariantCheck, Junction, RadialSolution, ShootingInfo, Side,
    SolverOptions, StartPoint,
};

pub const CSV_HEADER: [&str; 8] = ["side", "r", "w", "wp", "wpp", "mu_r", "mu_t", "residual"];

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Configuration(format!("{}: {e}", path.display()))
}

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid_csv<W: Write>(sol: &RadialSolution, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::Computation(format!("csv write: {e}"));
    w.write_record(CSV_HEADER).map_err(wrap)?;
    for (side, grid) in [(Side::Inner, &sol.inner), (Side::Outer, &sol.outer)] {
        for g in grid.iter() {
            let mut row = vec![side.as_str().to_string()];
            row.extend([g.r, g.w, g.wp, g.wpp, g.mu_r, g.mu_t, g.residual].map(fmt_f64));
            w.write_record(&row).map_err(wrap)?;
        }
    }
    w.flush().map_err(|e| Error::Computation(format!("csv write: {e}")))?;
    Ok(())
}

/// Returns `(inner, outer)` grids in file order.
pub fn read_grid_csv<R: Read>(input: R) -> Result<(Vec<GridPoint>, Vec<GridPoint>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let bad = |e: String| Error::Configuration(format!("solution csv: {e}"));
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {:?}", header)));
    }
    let (mut inner, mut outer) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: column {}: {e}", line + 2, CSV_HEADER[i])))
        };
        let g = GridPoint {
            r: num(1)?,
            w: num(2)?,
            wp: num(3)?,
            wpp: num(4)?,
            mu_r: num(5)?,
            mu_t: num(6)?,
            residual: num(7)?,
        };
        match rec[0].parse::<Side>()? {
            Side::Inner => inner.push(g),
            Side::Outer => outer.push(g),
        }
    }
    Ok((inner, outer))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max_abs: f64,
    pub inner_points: usize,
    pub outer_points: usize,
}

/// Everything in a [`RadialSolution`] except the grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSidecar {
    pub problem: AnnulusProblem,
    pub options: SolverOptions,
    pub junction: Option<Junction>,
    pub start: StartPoint,
    pub boundary_hits: BoundaryHits,
    pub shooting: ShootingInfo,
    pub residual_stats: ResidualStats,
    pub invariants: Vec<InvariantCheck>,
    /// File name of the grid, relative to the sidecar.
    pub grid_csv: String,
}

impl SolutionSidecar {
    pub fn from_solution(sol: &RadialSolution, grid_csv: String) -> Self {
        SolutionSidecar {
            problem: sol.problem,
            options: sol.options,
            junction: sol.junction,
            start: sol.start,
            boundary_hits: sol.boundary_hits,
            shooting: sol.shooting,
            residual_stats: ResidualStats {
                max_abs: sol.max_abs_residual(),
                inner_points: sol.inner.len(),
                outer_points: sol.outer.len(),
            },
            invariants: sol.check_invariants(),
            grid_csv,
        }
    }
}

pub fn prefix_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let mut csv = prefix.as_os_str().to_owned();
    csv.push(".csv");
    let mut json = prefix.as_os_str().to_owned();
    json.push(".json");
    (PathBuf::from(csv), PathBuf::from(json))
}

/// Writes `<prefix>.csv` and `<prefix>.json`.
pub fn save_solution(sol: &RadialSolution, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let (csv_path, json_path) = prefix_paths(prefix);
    let file = fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    write_grid_csv(sol, std::io::BufWriter::new(file))?;
    let name = csv_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sidecar = SolutionSidecar::from_solution(sol, name);
    let text = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Computation(format!("json encode: {e}")))?;
    fs::write(&json_path, text + "\n").map_err(|e| io_err(&json_path, e))?;
    Ok((csv_path, json_path))
}

pub fn load_solution(prefix: &Path) -> Result<RadialSolution> {
    let (csv_default, json_path) = prefix_paths(prefix);
    let text = fs::read_to_string(&json_path).map_err(|e| io_err(&json_path, e))?;
    let sidecar: SolutionSidecar =
        serde_json::from_str(&text).map_err(|e| io_err(&json_path, e))?;
    sidecar.problem.validate()?;
    let csv_path = json_path
        .parent()
        .map(|d| d.join(&sidecar.grid_csv))
        .filter(|_| !sidecar.grid_csv.is_empty())
        .unwrap_or(csv_default);
    let file = fs::File::open(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    let (inner, outer) = read_grid_csv(std::io::BufReader::new(file))?;
    Ok(RadialSolution {
        problem: sidecar.problem,
        options: sidecar.options,
        outer,
        inner,
        junction: sidecar.junction,
        start: sidecar.start,
        boundary_hits: sidecar.boundary_hits,
        shooting: sidecar.shooting,
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE, 1.2735434410275241] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits: String = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
            assert_eq!(digits.len(), 17);
        }
    }

    #[test]
    fn rejects_wrong_header() {
        let text = "side,r,w\nouter,1,2\n";
        assert!(read_grid_csv(text.as_bytes()).is_err());
    }
}
