//! Search over `(|alpha|^2, tap)` for the fastest chain that meets a fidelity floor.
//!
//! A parallel grid scan of the analytic model seeds a coordinate descent with shrinking
//! steps. Feasibility is the fidelity of the delivered state (postselected when the chain
//! postselects) against the floor.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{chain_report, ChainModel, LinkParams, RateReport};
use crate::error::{check_range, Error, Result};
use crate::oracle::ORACLE_ALPHA_SQ_LIMIT;

/// Amplitude standing in for the single-photon limit `|alpha|^2 -> 0`.
pub const SINGLE_PHOTON_ALPHA_SQ: f64 = 1e-4;

const REL_TOL: f64 = 1e-4;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub alpha_sq_range: (f64, f64),
    pub tap_range: (f64, f64),
    /// Grid points along `(alpha_sq, tap)`.
    pub grid_resolution: (usize, usize),
    pub fidelity_floor: f64,
    /// Length, attenuation and efficiencies; `alpha_sq` and `tap` are overwritten.
    pub link: LinkParams<f64>,
    pub model: ChainModel,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            alpha_sq_range: (0.01, 0.5),
            tap_range: (0.01, 0.45),
            grid_resolution: (40, 40),
            fidelity_floor: 0.9,
            link: LinkParams::new(0.13, 0.16, 150.0).with_efficiencies(0.9, 0.9),
            model: ChainModel::FOUR_LINKS,
        }
    }
}

impl SearchSpec {
    pub fn validate(&self) -> Result<()> {
        let (a0, a1) = self.alpha_sq_range;
        let (s0, s1) = self.tap_range;
        check_range("alpha_sq_range.min", a0, f64::MIN_POSITIVE, ORACLE_ALPHA_SQ_LIMIT, "must lie in (0, 4]")?;
        check_range("alpha_sq_range.max", a1, a0, ORACLE_ALPHA_SQ_LIMIT, "must lie in [min, 4]")?;
        check_range("tap_range.min", s0, f64::MIN_POSITIVE, 0.5, "must lie in (0, 0.5)")?;
        check_range("tap_range.max", s1, s0, 0.5 - f64::EPSILON, "must lie in [min, 0.5)")?;
        check_range("fidelity_floor", self.fidelity_floor, 0.0, 1.0, "must lie in [0, 1]")?;
        for (name, n) in
            [("grid_resolution.alpha_sq", self.grid_resolution.0), ("grid_resolution.tap", self.grid_resolution.1)]
        {
            if n < 2 {
                return Err(Error::InvalidParameter { name, value: n as f64, reason: "need at least 2 points" });
            }
        }
        self.model.levels()?;
        self.link.validate()
    }

    fn params(&self, alpha_sq: f64, tap: f64) -> LinkParams<f64> {
        self.link.with_alpha_sq(alpha_sq).with_tap(tap)
    }

    /// Analytic time and fidelity at one point.
    pub fn evaluate(&self, alpha_sq: f64, tap: f64) -> SurfacePoint {
        match chain_report(&self.params(alpha_sq, tap), &self.model) {
            Ok(r) if r.total_time.is_finite() => SurfacePoint {
                alpha_sq,
                tap,
                time: r.total_time,
                fidelity: r.final_fidelity,
                feasible: r.final_fidelity >= self.fidelity_floor,
            },
            _ => SurfacePoint { alpha_sq, tap, time: f64::INFINITY, fidelity: 0.0, feasible: false },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub alpha_sq: f64,
    pub tap: f64,
    /// Mean delivery time, seconds.
    pub time: f64,
    pub fidelity: f64,
    pub feasible: bool,
}

impl SurfacePoint {
    /// Faster first, then smaller `|alpha|^2`, then smaller tap.
    fn cmp_time(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.alpha_sq.total_cmp(&other.alpha_sq))
            .then(self.tap.total_cmp(&other.tap))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Optimum {
    Feasible {
        point: SurfacePoint,
        report: RateReport<f64>,
    },
    /// Nothing reaches the floor; carries the highest-fidelity grid point.
    Infeasible {
        best_fidelity: SurfacePoint,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub optimum: Optimum,
    /// Grid in row-major order (`alpha_sq` outer, tap inner).
    pub surface: Vec<SurfacePoint>,
    /// Accepted coordinate-descent moves.
    pub refinement_moves: usize,
}

impl SearchResult {
    pub fn point(&self) -> Option<&SurfacePoint> {
        match &self.optimum {
            Optimum::Feasible { point, .. } => Some(point),
            Optimum::Infeasible { .. } => None,
        }
    }

    pub fn report(&self) -> Option<&RateReport<f64>> {
        match &self.optimum {
            Optimum::Feasible { report, .. } => Some(report),
            Optimum::Infeasible { .. } => None,
        }
    }
}

fn linspace((lo, hi): (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
}

/// Grid scan followed by coordinate descent.
pub fn optimize(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let grid: Vec<(f64, f64)> = linspace(spec.alpha_sq_range, spec.grid_resolution.0)
        .flat_map(|a| linspace(spec.tap_range, spec.grid_resolution.1).map(move |s| (a, s)))
        .collect();
    let surface: Vec<SurfacePoint> = grid.par_iter().map(|&(a, s)| spec.evaluate(a, s)).collect();

    let Some(start) = surface.iter().filter(|p| p.feasible).min_by(|a, b| a.cmp_time(b)).copied() else {
        let best = surface
            .iter()
            .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity).then(b.cmp_time(a)))
            .copied()
            .expect("grid has at least four points");
        return Ok(SearchResult { optimum: Optimum::Infeasible { best_fidelity: best }, surface, refinement_moves: 0 });
    };

    let steps = [
        (spec.alpha_sq_range.1 - spec.alpha_sq_range.0) / (spec.grid_resolution.0 - 1) as f64,
        (spec.tap_range.1 - spec.tap_range.0) / (spec.grid_resolution.1 - 1) as f64,
    ];
    let (best, moves) = descend(spec, start, steps);
    let report = chain_report(&spec.params(best.alpha_sq, best.tap), &spec.model)?;
    Ok(SearchResult { optimum: Optimum::Feasible { point: best, report }, surface, refinement_moves: moves })
}

/// Coordinate descent inside the search box, halving both steps whenever a full pass
/// gains less than `REL_TOL`.
fn descend(spec: &SearchSpec, start: SurfacePoint, mut steps: [f64; 2]) -> (SurfacePoint, usize) {
    let ranges = [spec.alpha_sq_range, spec.tap_range];
    let mut best = start;
    let mut moves = 0;
    for _ in 0..MAX_HALVINGS {
        let before = best.time;
        loop {
            let pass_start = best.time;
            for axis in 0..2 {
                for dir in [-1.0, 1.0] {
                    let mut coords = [best.alpha_sq, best.tap];
                    coords[axis] = (coords[axis] + dir * steps[axis]).clamp(ranges[axis].0, ranges[axis].1);
                    let cand = spec.evaluate(coords[0], coords[1]);
                    if cand.feasible && cand.cmp_time(&best) == Ordering::Less {
                        best = cand;
                        moves += 1;
                    }
                }
            }
            if pass_start - best.time <= REL_TOL * pass_start {
                break;
            }
        }
        let gained = (before - best.time) / before;
        steps = [steps[0] / 2.0, steps[1] / 2.0];
        if gained < REL_TOL && steps[0] < 1e-3 * (ranges[0].1 - ranges[0].0) {
            break;
        }
    }
    (best, moves)
}

/// Best tap for the same architecture at [`SINGLE_PHOTON_ALPHA_SQ`], ignoring the floor.
pub fn single_photon_endpoint(spec: &SearchSpec) -> Result<SurfacePoint> {
    let reduced = SearchSpec {
        alpha_sq_range: (SINGLE_PHOTON_ALPHA_SQ, SINGLE_PHOTON_ALPHA_SQ),
        grid_resolution: (2, spec.grid_resolution.1.max(2)),
        fidelity_floor: 0.0,
        ..spec.clone()
    };
    let r = optimize(&reduced)?;
    r.point().copied().ok_or(Error::InvalidState("no finite time at the single-photon endpoint".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid() {
        SearchSpec::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = [
            SearchSpec { alpha_sq_range: (0.1, 8.0), ..Default::default() },
            SearchSpec { tap_range: (0.1, 0.5), ..Default::default() },
            SearchSpec { grid_resolution: (1, 10), ..Default::default() },
            SearchSpec { fidelity_floor: 1.5, ..Default::default() },
            SearchSpec { model: ChainModel { n_links: 8, ..ChainModel::FOUR_LINKS }, ..Default::default() },
        ];
        for s in bad {
            assert!(optimize(&s).is_err(), "{s:?}");
        }
    }

    #[test]
    fn impossible_floor_reports_best_fidelity() {
        let spec = SearchSpec { fidelity_floor: 1.0, grid_resolution: (6, 6), ..Default::default() };
        let r = optimize(&spec).unwrap();
        let Optimum::Infeasible { best_fidelity } = r.optimum else { panic!("expected infeasible") };
        assert!(r.surface.iter().all(|p| p.fidelity <= best_fidelity.fidelity));
        assert!(r.point().is_none());
    }

    #[test]
    fn ties_prefer_smaller_amplitude_then_tap() {
        let a = SurfacePoint { alpha_sq: 0.1, tap: 0.2, time: 1.0, fidelity: 0.9, feasible: true };
        let b = SurfacePoint { alpha_sq: 0.2, tap: 0.1, ..a };
        let c = SurfacePoint { tap: 0.1, ..a };
        assert_eq!(a.cmp_time(&b), Ordering::Less);
        assert_eq!(c.cmp_time(&a), Ordering::Less);
    }
}
