//! The standard candidate set searched by the H fits.

use super::{Association, Construction, HFunction};
use crate::numeric::Distribution;

pub const RHO_GRID_LEN: usize = 17;

/// ρ = 2^(−3 + 0.375 k), k = 0..16: log-spaced from 1/8 to 8.
pub fn rho_grid() -> [f64; RHO_GRID_LEN] {
    std::array::from_fn(|k| 2f64.powf(-3.0 + 0.375 * k as f64))
}

/// The 22 constructions of the catalog, before associations are applied.
pub fn catalog_constructions() -> Vec<Construction> {
    let mut out: Vec<Construction> = rho_grid()
        .iter()
        .map(|&rho| Construction::NormalRho { rho })
        .collect();
    let exp = Distribution::Exponential { rate: 1.0 };
    out.push(Construction::ConvolutionPair {
        f1: exp.clone(),
        f2: exp,
        f12: Distribution::Gamma {
            shape: 2.0,
            rate: 1.0,
        },
    });
    let unif = Distribution::Uniform { lo: 0.0, hi: 1.0 };
    out.push(Construction::ConvolutionPair {
        f1: unif.clone(),
        f2: unif,
        f12: Distribution::Triangular {
            lo: 0.0,
            mode: 1.0,
            hi: 2.0,
        },
    });
    let half = Distribution::NegGamma {
        shape: 0.5,
        rate: 1.0,
    };
    out.push(Construction::ConvolutionPair {
        f1: half.clone(),
        f2: half,
        f12: Distribution::NegGamma {
            shape: 1.0,
            rate: 1.0,
        },
    });
    out.push(Construction::Projection { axis: 1 });
    out.push(Construction::Projection { axis: 2 });
    out
}

/// Every catalog construction under every association (88 candidates).
pub fn catalog() -> Vec<HFunction> {
    catalog_constructions()
        .into_iter()
        .flat_map(|c| {
            Association::ALL.into_iter().map(move |a| HFunction {
                construction: c.clone(),
                association: a,
            })
        })
        .collect()
}

/// Catalog members in the same family as `h` (any association).
pub fn family_members(h: &HFunction) -> Vec<HFunction> {
    let fam = h.family();
    let members: Vec<HFunction> = catalog().into_iter().filter(|c| c.family() == fam).collect();
    if members.is_empty() {
        // a construction outside the catalog is its own family
        Association::ALL
            .into_iter()
            .map(|a| HFunction {
                construction: h.construction.clone(),
                association: a,
            })
            .collect()
    } else {
        members
    }
}
