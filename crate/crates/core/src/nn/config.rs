use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::encoding::DeVariant;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Plain message passing on degree (or attribute) features.
    Wlgnn,
    DegnnSpd,
    DegnnLp,
    /// SPD features plus aggregation over exclusive k-hop rings.
    DeagnnSpd,
    /// SPD features plus personalized-PageRank weighted aggregation.
    DeagnnPr,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Wlgnn,
        ModelKind::DegnnSpd,
        ModelKind::DegnnLp,
        ModelKind::DeagnnSpd,
        ModelKind::DeagnnPr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Wlgnn => "wlgnn",
            ModelKind::DegnnSpd => "degnn-spd",
            ModelKind::DegnnLp => "degnn-lp",
            ModelKind::DeagnnSpd => "deagnn-spd",
            ModelKind::DeagnnPr => "deagnn-pr",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregation {
    /// Mean over the closed neighborhood, then one linear map and ReLU.
    Gcn,
    /// Per-node perceptron messages summed over the closed neighborhood,
    /// then one linear map and ReLU; injective on multisets of inputs.
    Gin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Readout {
    /// `Σ_{pairs} |h_s − h_t|`
    Difference,
    /// `[Σ_s h_s, Σ_{pairs} |h_s − h_t|]`
    SumDifference,
}

macro_rules! named_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($v => $s),+ })
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($v),)+
                    _ => Err(Error::Config(format!("unknown value {s:?}"))),
                }
            }
        }
    };
}

named_enum!(Aggregation, Aggregation::Gcn => "gcn", Aggregation::Gin => "gin");
named_enum!(Readout, Readout::Difference => "diff", Readout::SumDifference => "sum-diff");

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub layers: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub d_max: usize,
    pub d_rw: usize,
    /// Ring depth `K` of the SPD-controlled aggregation.
    pub prop_depth: usize,
    pub damping: f64,
    pub ppr_tol: f64,
    pub agg: Aggregation,
    pub readout: Readout,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::DegnnSpd,
            layers: 2,
            hidden: 50,
            dropout: 0.0,
            d_max: 3,
            d_rw: 4,
            prop_depth: 2,
            damping: 0.9,
            ppr_tol: 1e-10,
            agg: Aggregation::Gcn,
            readout: Readout::SumDifference,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    /// Distance encoding concatenated to the input features, if any.
    pub fn de_variant(&self) -> Option<DeVariant> {
        match self.kind {
            ModelKind::Wlgnn => None,
            ModelKind::DegnnSpd | ModelKind::DeagnnSpd | ModelKind::DeagnnPr => {
                Some(DeVariant::SpdOneHot { d_max: self.d_max })
            }
            ModelKind::DegnnLp => Some(DeVariant::LandingProb {
                d_rw: self.d_rw,
                lenient: true,
            }),
        }
    }

    pub fn de_dim(&self) -> usize {
        self.de_variant().map_or(0, |d| d.dim())
    }

    /// Number of aggregation groups per layer (one weight set each).
    pub fn groups(&self) -> usize {
        match self.kind {
            ModelKind::DeagnnSpd => self.prop_depth,
            _ => 1,
        }
    }

    /// Hop radius an ego-network needs so that the forward pass on it equals
    /// the forward pass on the whole graph.
    pub fn receptive_radius(&self) -> usize {
        let walk = match self.kind {
            ModelKind::DegnnLp => self.d_rw,
            _ => 0,
        };
        let hops = match self.kind {
            ModelKind::DeagnnSpd => self.layers * self.prop_depth,
            _ => self.layers,
        };
        hops.max(walk).max(1)
    }

    /// Checks the hyperparameter grid used for tuning.
    pub fn validate_grid(&self) -> Result<()> {
        self.validate()?;
        let bad = |what: &str, v: String| Err(Error::Config(format!("{what}={v} is off the grid")));
        if !(1..=3).contains(&self.layers) {
            return bad("layers", self.layers.to_string());
        }
        if ![20, 50, 80, 100].contains(&self.hidden) {
            return bad("hidden", self.hidden.to_string());
        }
        if self.dropout != 0.0 && self.dropout != 0.2 {
            return bad("dropout", self.dropout.to_string());
        }
        if ![3, 4].contains(&self.d_rw) {
            return bad("d_rw", self.d_rw.to_string());
        }
        if ![3, 4].contains(&self.d_max) {
            return bad("d_max", self.d_max.to_string());
        }
        if !(1..=3).contains(&self.prop_depth) {
            return bad("prop_depth", self.prop_depth.to_string());
        }
        Ok(())
    }

    /// Checks that the configuration is well-formed, allowing values off the
    /// tuning grid (deeper or narrower models for expressiveness studies).
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.layers > 64 {
            return fail(format!("layers={} exceeds 64", self.layers));
        }
        if self.hidden == 0 {
            return fail("hidden must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout={} outside [0, 1)", self.dropout));
        }
        if self.d_max == 0 || self.d_rw == 0 || self.prop_depth == 0 {
            return fail("d_max, d_rw and prop_depth must be positive".into());
        }
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return fail(format!("damping={} outside (0, 1)", self.damping));
        }
        if !(self.ppr_tol > 0.0) {
            return fail("ppr_tol must be positive".into());
        }
        Ok(())
    }

    pub fn to_key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("model", self.kind.to_string()),
            ("layers", self.layers.to_string()),
            ("hidden", self.hidden.to_string()),
            ("dropout", format!("{:e}", self.dropout)),
            ("d_max", self.d_max.to_string()),
            ("d_rw", self.d_rw.to_string()),
            ("prop_depth", self.prop_depth.to_string()),
            ("damping", format!("{:e}", self.damping)),
            ("ppr_tol", format!("{:e}", self.ppr_tol)),
            ("agg", self.agg.to_string()),
            ("readout", self.readout.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }

    /// Overrides fields from `map`; unknown keys are left for the caller.
    pub fn apply_key_values(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value {v:?} for {key}")))
        }
        for (k, v) in map {
            match k.as_str() {
                "model" => self.kind = v.parse()?,
                "layers" => self.layers = parse(k, v)?,
                "hidden" => self.hidden = parse(k, v)?,
                "dropout" => self.dropout = parse(k, v)?,
                "d_max" => self.d_max = parse(k, v)?,
                "d_rw" => self.d_rw = parse(k, v)?,
                "prop_depth" => self.prop_depth = parse(k, v)?,
                "damping" => self.damping = parse(k, v)?,
                "ppr_tol" => self.ppr_tol = parse(k, v)?,
                "agg" => self.agg = v.parse()?,
                "readout" => self.readout = v.parse()?,
                "seed" => self.seed = parse(k, v)?,
                _ => {}
            }
        }
        self.validate()
    }

    pub const KEYS: [&'static str; 12] = [
        "model",
        "layers",
        "hidden",
        "dropout",
        "d_max",
        "d_rw",
        "prop_depth",
        "damping",
        "ppr_tol",
        "agg",
        "readout",
        "seed",
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_sit_on_the_grid() {
        for kind in ModelKind::ALL {
            ModelConfig::new(kind).validate_grid().unwrap();
        }
        let mut c = ModelConfig::default();
        c.hidden = 32;
        assert!(c.validate_grid().is_err());
        assert!(c.validate().is_ok());
        c.dropout = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn key_value_round_trip() {
        let mut c = ModelConfig::new(ModelKind::DeagnnPr);
        c.damping = 0.85;
        c.agg = Aggregation::Gin;
        c.readout = Readout::Difference;
        c.seed = 17;
        let map: BTreeMap<String, String> = c
            .to_key_values()
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let mut back = ModelConfig::default();
        back.apply_key_values(&map).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn radius_covers_receptive_field() {
        let mut c = ModelConfig::new(ModelKind::DeagnnSpd);
        c.layers = 2;
        c.prop_depth = 3;
        assert_eq!(c.receptive_radius(), 6);
        c.kind = ModelKind::DegnnLp;
        assert_eq!(c.receptive_radius(), 4);
    }
}
