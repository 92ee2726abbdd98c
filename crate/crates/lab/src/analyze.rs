//! Norm tables for stored states.

use bfamily_core::lp::{build_lp_basis, sobolev_norm, BesovSpec};
use bfamily_core::spectral::RealField;

use crate::manifest::AnalyzeSpec;
use crate::LabResult;

#[derive(Debug, Clone, PartialEq)]
pub struct NormRow {
    pub s: f64,
    /// `None` for the Sobolev norm.
    pub q: Option<f64>,
    pub value: f64,
}

impl NormRow {
    pub fn label(&self) -> String {
        match self.q {
            None => format!("H^{}", self.s),
            Some(q) => format!("B^{}_{{2,{}}}", self.s, q),
        }
    }
}

/// `H^s` for every order, then `B^s_{2,q}` for every pair.
pub fn norm_table(u: &RealField, spec: &AnalyzeSpec) -> LabResult<Vec<NormRow>> {
    let basis = build_lp_basis(u.grid())?;
    let mut rows: Vec<NormRow> = spec
        .s
        .iter()
        .map(|&s| NormRow { s, q: None, value: sobolev_norm(u, s) })
        .collect();
    for &s in &spec.s {
        for &q in &spec.q {
            let value = basis.besov_norm(u, &BesovSpec::l2(s, q))?;
            rows.push(NormRow { s, q: Some(q), value });
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "norm,s,q,value";

pub fn csv(rows: &[NormRow]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let (kind, q) = match r.q {
            None => ("sobolev", "na".to_string()),
            Some(q) => ("besov", format!("{q}")),
        };
        out.push_str(&format!("{kind},{},{q},{:e}\n", r.s, r.value));
    }
    out
}

pub fn print_table(rows: &[NormRow]) -> String {
    let width = rows.iter().map(|r| r.label().len()).max().unwrap_or(4);
    rows.iter()
        .map(|r| format!("{:<width$}  {:.12e}\n", r.label(), r.value))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use bfamily_core::spectral::make_grid;

    #[test]
    fn zero_state_has_zero_norms() {
        let g = make_grid(10.0, 128).unwrap();
        let rows = norm_table(&RealField::zeros(&g), &AnalyzeSpec::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.value == 0.0));
    }

    #[test]
    fn single_cosine_matches_closed_form() {
        let l = std::f64::consts::PI * 4.0;
        let g = make_grid(l, 256).unwrap();
        let k = 3.0 * std::f64::consts::PI / l;
        let u = RealField::from_fn(&g, |x| (k * x).cos());
        let spec = AnalyzeSpec { s: vec![0.0, 1.5, 2.0], q: vec![2.0] };
        let rows = norm_table(&u, &spec).unwrap();
        for r in rows.iter().filter(|r| r.q.is_none()) {
            // ||cos||_{L2(-L,L)}^2 = L, weighted by (1 + k^2)^s.
            let exact = (l * (1.0 + k * k).powf(r.s)).sqrt();
            assert!((r.value - exact).abs() <= 1e-12 * exact);
        }
        assert!(csv(&rows).starts_with(CSV_HEADER));
        assert_eq!(print_table(&rows).lines().count(), rows.len());
    }
}
