use std::str::FromStr;

use anyhow::{bail, Result};
use catrep::analytic::{chain_report, link_fidelity, link_state, link_time, swap_stage, ChainModel, LinkParams};

use crate::table::{num, Table};

const LARGE_ALPHA: [f64; 3] = [0.5, 1.0, 2.0];
const SMALL_ALPHA: [f64; 3] = [0.05, 0.1, 0.2];
const POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Elementary-link fidelity against tap.
    Fig2,
    /// Elementary-link time against tap.
    Fig3,
    /// Fidelity after one swap against tap.
    Fig5,
    /// Four-link fidelity with and without postselection, small amplitudes.
    Fig6,
}

impl FromStr for Figure {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig2" => Figure::Fig2,
            "fig3" => Figure::Fig3,
            "fig5" => Figure::Fig5,
            "fig6" => Figure::Fig6,
            other => bail!("unknown figure {other:?}; expected fig2, fig3, fig5 or fig6"),
        })
    }
}

/// `n` taps spread over `(0, max]`.
fn taps(max: f64) -> impl Iterator<Item = f64> {
    (1..=POINTS).map(move |i| max * i as f64 / POINTS as f64)
}

pub fn figure(which: Figure, link: &LinkParams<f64>) -> Result<Table> {
    let at = |a: f64, s: f64| link.with_alpha_sq(a).with_tap(s);
    Ok(match which {
        Figure::Fig2 => {
            let mut t = Table::new("fig2", &["alpha_sq", "tap", "fidelity"]);
            for a in LARGE_ALPHA {
                for s in taps(0.2) {
                    t.push(vec![num(a), num(s), num(link_fidelity(&at(a, s)))]);
                }
            }
            t
        }
        Figure::Fig3 => {
            let mut t = Table::new("fig3", &["alpha_sq", "tap", "T0_seconds"]);
            for a in LARGE_ALPHA {
                for s in taps(0.2) {
                    t.push(vec![num(a), num(s), num(link_time(&at(a, s)))]);
                }
            }
            t
        }
        Figure::Fig5 => {
            let mut t = Table::new("fig5", &["alpha_sq", "tap", "fidelity"]);
            for a in LARGE_ALPHA {
                for s in taps(0.2) {
                    let p = at(a, s);
                    let f = swap_stage(&link_state(&p), &p, Default::default()).state_after.f_minus;
                    t.push(vec![num(a), num(s), num(f)]);
                }
            }
            t
        }
        Figure::Fig6 => {
            let mut t = Table::new("fig6", &["alpha_sq", "tap", "postselection", "fidelity"]);
            for a in SMALL_ALPHA {
                for s in taps(0.45) {
                    let r = chain_report(&at(a, s), &ChainModel::FOUR_LINKS)?;
                    let without = r.f2().expect("two swap levels");
                    let with = r.postselected_fidelity.expect("postselecting model");
                    t.push(vec![num(a), num(s), "false".into(), num(without)]);
                    t.push(vec![num(a), num(s), "true".into(), num(with)]);
                }
            }
            t
        }
    })
}
