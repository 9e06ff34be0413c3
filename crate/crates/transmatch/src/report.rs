//! Serializable records for match, group-size and blur results.

use serde::{Deserialize, Serialize};
use transmatch_core::{Candidate, EgsResult, MatchResult, OptaResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredLocation {
    pub row: usize,
    pub col: usize,
    pub rho: f64,
}

impl From<Candidate> for ScoredLocation {
    fn from(c: Candidate) -> Self {
        Self { row: c.loc.row, col: c.loc.col, rho: c.rho }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub centers: usize,
    pub eliminated: usize,
    pub retained: usize,
    pub elim_pct: f64,
    /// Full correlation evaluations.
    pub ops: usize,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub mode: String,
    pub best: ScoredLocation,
    pub refined: ScoredLocation,
    pub stats: StatsReport,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa: Option<usize>,
    pub detected: bool,
}

impl From<&MatchResult> for MatchReport {
    fn from(r: &MatchResult) -> Self {
        Self {
            mode: r.mode.as_str().to_string(),
            best: r.best.into(),
            refined: r.refined.into(),
            stats: StatsReport {
                centers: r.stats.centers,
                eliminated: r.stats.eliminated,
                retained: r.stats.retained,
                elim_pct: r.stats.elimination_pct(),
                ops: r.stats.operations(),
                ms: r.stats.elapsed_ms.unwrap_or(0.0),
            },
            kappa: r.kappa,
            detected: r.detected(),
        }
    }
}

impl MatchReport {
    pub const CSV_HEADER: [&'static str; 13] = [
        "mode", "best_row", "best_col", "best_rho", "refined_row", "refined_col", "refined_rho", "centers",
        "eliminated", "retained", "elim_pct", "ops", "ms",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let s = &self.stats;
        vec![
            self.mode.clone(),
            self.best.row.to_string(),
            self.best.col.to_string(),
            self.best.rho.to_string(),
            self.refined.row.to_string(),
            self.refined.col.to_string(),
            self.refined.rho.to_string(),
            s.centers.to_string(),
            s.eliminated.to_string(),
            s.retained.to_string(),
            s.elim_pct.to_string(),
            s.ops.to_string(),
            s.ms.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub h: usize,
    pub w: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgsReport {
    pub h_e: usize,
    pub w_e: usize,
    pub cost: f64,
    pub trace: Vec<TraceEntry>,
}

impl From<&EgsResult> for EgsReport {
    fn from(r: &EgsResult) -> Self {
        Self {
            h_e: r.h_e,
            w_e: r.w_e,
            cost: r.cost.total,
            trace: r.trace.iter().map(|s| TraceEntry { h: s.h, w: s.w, cost: s.cost.total }).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptaSidecar {
    pub h_e: usize,
    pub w_e: usize,
    pub cost: f64,
    pub kappa: usize,
    pub lambda: f64,
    /// Locations restored to original content, per iteration.
    pub restored_counts: Vec<usize>,
}

impl From<&OptaResult> for OptaSidecar {
    fn from(r: &OptaResult) -> Self {
        Self {
            h_e: r.h_e,
            w_e: r.w_e,
            cost: r.cost.total,
            kappa: r.kappa,
            lambda: r.lambda,
            restored_counts: r.trace.iter().map(|i| i.restored).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use transmatch_core::{match_template, Image, Location, MatchMode, MatchParams};

    #[test]
    fn match_json_shape() {
        let mut state = 12345u64;
        let img = Image::from_fn(30, 30, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 56) as f64
        })
        .unwrap();
        let t = img.crop(Location::new(4, 9), 6, 6).unwrap();
        let res = match_template(&t, &img, MatchMode::Egs, &MatchParams::default()).unwrap();
        let json = serde_json::to_value(MatchReport::from(&res)).unwrap();
        assert_eq!(json["mode"], "egs");
        assert_eq!(json["best"]["row"], 4);
        assert_eq!(json["refined"]["col"], 9);
        for key in ["centers", "eliminated", "retained", "elim_pct", "ops", "ms"] {
            assert!(json["stats"].get(key).is_some(), "{key}");
        }
        assert!(json.get("kappa").is_none());
        let back: MatchReport = serde_json::from_value(json).unwrap();
        assert_eq!(back.csv_record().len(), MatchReport::CSV_HEADER.len());
    }
}
