//! Global invariants of the elliptic surface and the Shioda-Tate accounting.

use serde::{Deserialize, Serialize};

use crate::weiermodel::{LocalFiberData, ModelError, WeierstrassModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInvariants {
    pub e: i64,
    pub chi: i64,
    pub p_g: i64,
    pub q: i64,
    pub b1: i64,
    pub b2: i64,
    pub h11: i64,
    pub sum_m_minus_1: i64,
    pub rank_bound: i64,
    pub j_degree: i64,
}

impl SurfaceInvariants {
    /// Picard number given the Mordell-Weil rank `r`.
    pub fn rho_given_r(&self, r: i64) -> i64 {
        r + 2 + self.sum_m_minus_1
    }

    /// Betti numbers `b0..b4`.
    pub fn betti(&self) -> [i64; 5] {
        [1, self.b1, self.b2, self.b1, 1]
    }
}

/// Invariants from an already computed fiber table.
pub fn invariants_from_fibers(fibers: &[LocalFiberData], j_degree: i64) -> SurfaceInvariants {
    let weighted = |f: fn(&LocalFiberData) -> i64| -> i64 {
        fibers.iter().map(|d| d.place.degree() as i64 * f(d)).sum()
    };
    let e = weighted(|d| d.e_loc);
    let sum_m_minus_1 = weighted(|d| d.m - 1);
    let chi = e.div_euclid(12);
    let p_g = chi - 1;
    let b2 = e - 2;
    let h11 = b2 - 2 * p_g;
    SurfaceInvariants {
        e,
        chi,
        p_g,
        q: 0,
        b1: 0,
        b2,
        h11,
        sum_m_minus_1,
        rank_bound: h11 - 2 - sum_m_minus_1,
        j_degree,
    }
}

pub fn surface_invariants(model: &WeierstrassModel) -> Result<SurfaceInvariants, ModelError> {
    let jd = j_degree(model)?;
    Ok(invariants_from_fibers(&model.fiber_table(), jd))
}

/// Degree of `j` as a map to the projective line.
pub fn j_degree(model: &WeierstrassModel) -> Result<i64, ModelError> {
    Ok(model.validate()?.j.height_degree() as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub left: String,
    pub right: String,
    pub equal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsogenyVerdict {
    NecessaryConditionsHold,
    NotGenericallyIsogenous,
}

impl std::fmt::Display for IsogenyVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IsogenyVerdict::NecessaryConditionsHold => write!(f, "necessary conditions hold"),
            IsogenyVerdict::NotGenericallyIsogenous => write!(f, "not generically isogenous"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsogenyComparison {
    pub rows: Vec<ComparisonRow>,
    pub verdict: IsogenyVerdict,
    /// Fiber-by-fiber component counts, which need not agree.
    pub m_per_place: (Vec<(String, i64)>, Vec<(String, i64)>),
    pub note: String,
}

pub fn compare_isogeny_invariants(
    m1: &WeierstrassModel,
    m2: &WeierstrassModel,
) -> Result<IsogenyComparison, ModelError> {
    let f1 = m1.fiber_table();
    let f2 = m2.fiber_table();
    let s1 = invariants_from_fibers(&f1, j_degree(m1)?);
    let s2 = invariants_from_fibers(&f2, j_degree(m2)?);
    let mut rows = Vec::new();
    let mut push = |name: &str, a: String, b: String| {
        let equal = a == b;
        rows.push(ComparisonRow { name: name.to_string(), left: a, right: b, equal });
    };
    push("j_degree", s1.j_degree.to_string(), s2.j_degree.to_string());
    push("e", s1.e.to_string(), s2.e.to_string());
    push("betti", format!("{:?}", s1.betti()), format!("{:?}", s2.betti()));
    push("p_g", s1.p_g.to_string(), s2.p_g.to_string());
    push("q", s1.q.to_string(), s2.q.to_string());
    push("sum_m_minus_1", s1.sum_m_minus_1.to_string(), s2.sum_m_minus_1.to_string());
    let verdict = if rows.iter().all(|r| r.equal) {
        IsogenyVerdict::NecessaryConditionsHold
    } else {
        IsogenyVerdict::NotGenericallyIsogenous
    };
    let per = |f: &[LocalFiberData]| f.iter().map(|d| (d.place.to_string(), d.m)).collect();
    Ok(IsogenyComparison {
        rows,
        verdict,
        m_per_place: (per(&f1), per(&f2)),
        note: "component counts per place are not isogeny invariants; only their sum is compared".to_string(),
    })
}
