//! Space descriptors: `lp:<p>`, `wl1:<w,...>`, `wlp:<p>:<w,...>`,
//! `lorentz:<w,...>` and `plugin:<name>`.

use super::norm::{plugin, NormModel, PExp, PLUGIN_NAMES};
use crate::error::{Error, Result};

fn parse_p(s: &str) -> Result<PExp> {
    let s = s.trim();
    let p = match s {
        "inf" | "Inf" | "infinity" | "∞" => f64::INFINITY,
        _ => s
            .parse::<f64>()
            .map_err(|_| Error::Descriptor(format!("bad exponent `{s}`")))?,
    };
    PExp::new(p).ok_or_else(|| Error::Descriptor(format!("exponent must be >= 1, got `{s}`")))
}

fn parse_weights(s: &str) -> Result<Vec<f64>> {
    let weights = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            let w: f64 = t
                .parse()
                .map_err(|_| Error::Descriptor(format!("bad weight `{t}`")))?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Descriptor(format!("weights must be positive, got `{t}`")));
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    if weights.is_empty() {
        return Err(Error::Descriptor("empty weight list".into()));
    }
    Ok(weights)
}

pub fn parse_norm(descriptor: &str) -> Result<NormModel> {
    let d = descriptor.trim();
    let (family, rest) = d
        .split_once(':')
        .ok_or_else(|| Error::Descriptor(format!("missing `:` in `{d}`")))?;
    match family.trim() {
        "lp" => Ok(NormModel::Lp(parse_p(rest)?)),
        "wl1" => Ok(NormModel::WeightedLp {
            p: PExp::One,
            weights: parse_weights(rest)?,
        }),
        "wlp" => {
            let (p, w) = rest
                .split_once(':')
                .ok_or_else(|| Error::Descriptor(format!("expected `wlp:<p>:<weights>`, got `{d}`")))?;
            Ok(NormModel::WeightedLp {
                p: parse_p(p)?,
                weights: parse_weights(w)?,
            })
        }
        "lorentz" => {
            let weights = parse_weights(rest)?;
            if weights.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Descriptor(
                    "Lorentz weights must be non-increasing".into(),
                ));
            }
            Ok(NormModel::Lorentz { weights })
        }
        "plugin" => plugin(rest.trim()).map(NormModel::Custom).ok_or_else(|| {
            Error::Descriptor(format!(
                "unknown plugin `{}` (available: {})",
                rest.trim(),
                PLUGIN_NAMES.join(", ")
            ))
        }),
        other => Err(Error::Descriptor(format!("unknown norm family `{other}`"))),
    }
}
