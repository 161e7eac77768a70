use crate::entropy::ToolFlags;
use crate::error::{Error, Result};
use crate::partition::{DEFAULT_THRESHOLD_1, DEFAULT_THRESHOLD_2};
use crate::transform::{GraphOverrides, LambdaQModel};

/// Encoder parameters. Defaults enable every tool.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    /// Quantization step, shared by Y, U and V.
    pub q: f64,
    /// Block color variance above which a probe block is non-smooth.
    pub threshold_1: f64,
    /// Non-smooth block fraction above which the frame is split.
    pub threshold_2: f64,
    /// Kd-tree depth for every slice; chosen from the point count when unset.
    pub depth: Option<u32>,
    /// Depth of the probe tree used for slice partitioning.
    pub probe_depth: Option<u32>,
    pub graph: GraphOverrides,
    pub lambda_model: LambdaQModel,
    pub tools: ToolFlags,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            q: 16.0,
            threshold_1: DEFAULT_THRESHOLD_1,
            threshold_2: DEFAULT_THRESHOLD_2,
            depth: None,
            probe_depth: None,
            graph: GraphOverrides::default(),
            lambda_model: LambdaQModel::default(),
            tools: ToolFlags::default(),
        }
    }
}

/// A positive finite value that survives the round trip through `f32`.
fn header_real(name: &str, v: f64) -> Result<f64> {
    let r = v as f32;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(r as f64)
}

impl EncoderConfig {
    pub fn with_q(q: f64) -> Self {
        EncoderConfig { q, ..Default::default() }
    }

    pub fn with_tools(mut self, tools: ToolFlags) -> Self {
        self.tools = tools;
        self
    }

    /// Checks ranges and returns the values exactly as the header stores them.
    pub(crate) fn resolved(&self) -> Result<Resolved> {
        let q = header_real("Q", self.q)?;
        if !(self.threshold_1.is_finite() && self.threshold_1 >= 0.0) {
            return Err(Error::Config(format!("threshold_1 must be >= 0, got {}", self.threshold_1)));
        }
        if !(0.0..=1.0).contains(&self.threshold_2) {
            return Err(Error::Config(format!("threshold_2 must be in [0, 1], got {}", self.threshold_2)));
        }
        if !(self.lambda_model.a > 0.0 && self.lambda_model.a.is_finite() && self.lambda_model.b.is_finite()) {
            return Err(Error::Config("lambda model needs a > 0 and finite b".into()));
        }
        for d in [self.depth, self.probe_depth].into_iter().flatten() {
            if d > 24 {
                return Err(Error::Config(format!("depth {d} exceeds 24")));
            }
        }
        let graph = GraphOverrides {
            delta: self.graph.delta.map(|d| header_real("delta", d)).transpose()?,
            tau: self.graph.tau.map(|t| header_real("tau", t)).transpose()?,
        };
        Ok(Resolved { q, lambda: self.lambda_model.lambda(q), graph })
    }
}

pub(crate) struct Resolved {
    pub q: f64,
    pub lambda: f64,
    pub graph: GraphOverrides,
}
