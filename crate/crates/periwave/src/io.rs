//! File formats: wave-solution JSON records (scalars plus a sibling profile
//! CSV), continuation summary CSV, and generic JSON report writing. All
//! numeric output is full double precision and contains nothing run-dependent,
//! so identical configurations produce bit-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PwError, Result};
use crate::profile::Profile;
use crate::solver::WaveSolution;

/// Scalar part of a wave solution as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionRecord {
    #[serde(rename = "K")]
    pub k: f64,
    pub ell: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub lambda: f64,
    pub c: Option<f64>,
    pub c0: f64,
    pub residual_rel: f64,
    pub monotone: bool,
    pub iterations: u64,
    pub warnings: Vec<String>,
    /// File name of the profile CSV next to this record.
    pub profile_csv: String,
}

impl SolutionRecord {
    pub fn from_solution(sol: &WaveSolution, profile_csv: String) -> Self {
        Self {
            k: sol.k,
            ell: sol.ell,
            t: sol.t,
            e: sol.e,
            lambda: sol.lambda,
            c: sol.c,
            c0: sol.c0,
            residual_rel: sol.residual_rel,
            monotone: sol.monotone,
            iterations: sol.iterations as u64,
            warnings: sol.warnings.clone(),
            profile_csv,
        }
    }

    /// Parses an untrusted JSON record, checking the scalars are usable.
    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let rec: SolutionRecord = serde_json::from_slice(bytes)?;
        for (name, v) in [
            ("K", rec.k),
            ("ell", rec.ell),
            ("T", rec.t),
            ("E", rec.e),
            ("lambda", rec.lambda),
            ("c0", rec.c0),
            ("residual_rel", rec.residual_rel),
        ] {
            if !v.is_finite() {
                return Err(PwError::Parse(format!("non-finite field `{name}`")));
            }
        }
        if let Some(c) = rec.c {
            if !c.is_finite() || c <= 0.0 {
                return Err(PwError::Parse("wave speed must be positive".into()));
            }
        }
        if rec.profile_csv.is_empty() || rec.profile_csv.contains(['/', '\\']) {
            return Err(PwError::Parse(
                "profile_csv must be a plain sibling file name".into(),
            ));
        }
        Ok(rec)
    }
}

/// Stable file stem for one continuation stage.
pub fn stage_stem(ell: f64) -> String {
    format!("solution_ell{ell:.6}")
}

/// Writes `stem.json` + `stem.csv` into `dir` and returns the JSON path.
pub fn write_solution(dir: &Path, stem: &str, sol: &WaveSolution) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_name = format!("{stem}.csv");
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(&csv_name);
    let file = fs::File::create(&csv_path)?;
    sol.profile.write_csv(file)?;
    let record = SolutionRecord::from_solution(sol, csv_name);
    fs::write(&json_path, serde_json::to_string_pretty(&record)?)?;
    Ok(json_path)
}

/// Loads a solution record together with its profile.
pub fn read_solution(json_path: &Path) -> Result<(SolutionRecord, Profile)> {
    let bytes = fs::read(json_path)?;
    let record = SolutionRecord::from_json_slice(&bytes)?;
    let dir = json_path.parent().unwrap_or_else(|| Path::new("."));
    let csv_bytes = fs::read(dir.join(&record.profile_csv))?;
    let profile = Profile::from_csv_bytes(&csv_bytes)?;
    Ok((record, profile))
}

/// Continuation summary: one `ell,T,E,lambda,c,residual` row per stage.
pub fn write_summary(path: &Path, sols: &[WaveSolution]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["ell", "T", "E", "lambda", "c", "residual"])?;
    for s in sols {
        wtr.write_record(&[
            format!("{}", s.ell),
            format!("{}", s.t),
            format!("{}", s.e),
            format!("{}", s.lambda),
            s.c.map(|c| format!("{c}")).unwrap_or_default(),
            format!("{}", s.residual_rel),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::Grid;

    fn dummy_solution() -> WaveSolution {
        let grid = Grid::new(-2.0, 0.5, 9).unwrap();
        let profile = Profile::new(grid, (0..9).map(|i| i as f64 * 0.3).collect()).unwrap();
        WaveSolution {
            profile,
            k: 1.0,
            ell: 0.1,
            t: 0.5,
            e: 1.0,
            lambda: 2.0,
            c: Some(1.0 / 2.0f64.sqrt()),
            c0: 0.7,
            residual_rel: 1e-6,
            monotone: true,
            iterations: 10,
            warnings: vec![],
        }
    }

    #[test]
    fn solution_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let sol = dummy_solution();
        let json = write_solution(dir.path(), &stage_stem(sol.ell), &sol).unwrap();
        let (rec, prof) = read_solution(&json).unwrap();
        assert_eq!(rec.k, sol.k);
        assert_eq!(rec.c, sol.c);
        assert_eq!(prof.values, sol.profile.values);
    }

    #[test]
    fn record_rejects_bad_json() {
        assert!(SolutionRecord::from_json_slice(b"{").is_err());
        assert!(SolutionRecord::from_json_slice(b"{\"K\":1}").is_err());
        let mut rec = SolutionRecord::from_solution(&dummy_solution(), "p.csv".into());
        rec.profile_csv = "../escape.csv".into();
        let bytes = serde_json::to_vec(&rec).unwrap();
        assert!(SolutionRecord::from_json_slice(&bytes).is_err());
    }
}
