use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use catrep::analytic::{ChainModel, LinkParams, SwapAcceptance, DEFAULT_ATTENUATION_KM, DEFAULT_LIGHT_SPEED_KM_S};
use catrep::chain_sim::{ChainConfig, SwapCost};
use catrep::optimizer::SearchSpec;
use serde::{Deserialize, Serialize};

/// Run configuration. Every section is optional; missing keys take the defaults below.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub link: LinkSection,
    pub chain: ChainSection,
    pub search: SearchSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub alpha_sq: f64,
    pub tap: f64,
    pub length_km: f64,
    pub attenuation_length_km: f64,
    pub eta_d: f64,
    pub eta_m: f64,
    pub light_speed_km_s: f64,
}

impl Default for LinkSection {
    fn default() -> Self {
        Self {
            alpha_sq: 0.13,
            tap: 0.16,
            length_km: 150.0,
            attenuation_length_km: DEFAULT_ATTENUATION_KM,
            eta_d: 0.9,
            eta_m: 0.9,
            light_speed_km_s: DEFAULT_LIGHT_SPEED_KM_S,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainSection {
    pub n_links: usize,
    pub n_trials: usize,
    pub rng_seed: u64,
    pub postselection: bool,
    pub acceptance: SwapAcceptance,
    pub swap_cost: SwapCost,
    pub keep_records: bool,
}

impl Default for ChainSection {
    fn default() -> Self {
        Self {
            n_links: 4,
            n_trials: 10_000,
            rng_seed: 0,
            postselection: true,
            acceptance: SwapAcceptance::OddOnly,
            swap_cost: SwapCost::Free,
            keep_records: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub alpha_sq_range: [f64; 2],
    pub tap_range: [f64; 2],
    pub grid_resolution: [usize; 2],
    pub fidelity_floor: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        let s = SearchSpec::default();
        Self {
            alpha_sq_range: [s.alpha_sq_range.0, s.alpha_sq_range.1],
            tap_range: [s.tap_range.0, s.tap_range.1],
            grid_resolution: [s.grid_resolution.0, s.grid_resolution.1],
            fidelity_floor: s.fidelity_floor,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Directory for tables and summaries; stdout only when unset.
    pub dir: Option<PathBuf>,
    /// Also write a JSON summary next to the tables.
    pub json: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn link_params(&self) -> LinkParams<f64> {
        let l = &self.link;
        LinkParams {
            alpha_sq: l.alpha_sq,
            tap: l.tap,
            length_km: l.length_km,
            attenuation_length_km: l.attenuation_length_km,
            eta_d: l.eta_d,
            eta_m: l.eta_m,
            light_speed_km_s: l.light_speed_km_s,
        }
    }

    /// A zero-length link is allowed through validation so `link` can report it.
    pub fn is_zero_length(&self) -> bool {
        self.link.length_km == 0.0
    }

    pub fn chain_config(&self) -> ChainConfig {
        let c = &self.chain;
        ChainConfig {
            n_links: c.n_links,
            link: self.link_params(),
            n_trials: c.n_trials,
            rng_seed: c.rng_seed,
            postselection: c.postselection,
            acceptance: c.acceptance,
            swap_cost: c.swap_cost,
            stages: None,
            keep_records: c.keep_records,
        }
    }

    pub fn chain_model(&self) -> ChainModel {
        self.chain_config().model()
    }

    pub fn search_spec(&self) -> SearchSpec {
        let s = &self.search;
        SearchSpec {
            alpha_sq_range: (s.alpha_sq_range[0], s.alpha_sq_range[1]),
            tap_range: (s.tap_range[0], s.tap_range[1]),
            grid_resolution: (s.grid_resolution[0], s.grid_resolution[1]),
            fidelity_floor: s.fidelity_floor,
            link: self.link_params(),
            model: self.chain_model(),
        }
    }

    /// Re-check every physical bound.
    pub fn validate(&self) -> Result<()> {
        let mut link = self.link_params();
        if self.is_zero_length() {
            link.length_km = 1.0;
        }
        link.validate().context("[link]")?;
        let mut chain = self.chain_config();
        chain.link = link;
        chain.validate().context("[chain]")?;
        let mut search = self.search_spec();
        search.link = link;
        search.validate().context("[search]")?;
        Ok(())
    }
}
