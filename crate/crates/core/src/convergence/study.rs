use rayon::prelude::*;

use crate::chain::{lp_norm, sample_field, strain, ChainConfig, NormOrder};
use crate::error::Result;
use crate::model::{assemble_with_potential, to_strain_form, ModelKind};
use crate::partition::RegionPartition;
use crate::potential::PairPotential;
use crate::witness::Witness;

use super::fit::{fit_slope, SlopeFit};
use super::solver::solve_equilibrium;

/// Per-N measurements of one convergence run.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPoint {
    pub n: usize,
    pub epsilon: f64,
    /// `‖De‖_p` for each requested `p`, same order as the table's `p_list`.
    pub error_norms: Vec<f64>,
    /// `‖De‖_∞`.
    pub strain_sup: f64,
    /// `‖L e‖_∞`, linear part only.
    pub operator_sup: f64,
    /// Largest row ℓ¹ norm of `ε·L̃`.
    pub strain_bound: f64,
}

impl StudyPoint {
    /// `‖L e‖_∞ ≤ (bound/ε)‖De‖_∞`.
    pub fn stability_inequality_holds(&self) -> bool {
        self.operator_sup <= self.strain_bound / self.epsilon * self.strain_sup
    }

    /// `‖De‖_p ≥ ε^{1/p} ‖De‖_∞` for the norm at `index`.
    pub fn norm_equivalence_holds(&self, p: NormOrder, index: usize) -> bool {
        // 1 + 1e-12 absorbs rounding of the powers when e is concentrated on one atom
        self.error_norms[index] * (1.0 + 1e-12) >= self.epsilon.powf(p.reciprocal()) * self.strain_sup
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub epsilon: f64,
    pub p: NormOrder,
    pub error_norm: f64,
    /// Slope against the previous N, absent on the first row.
    pub running_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub model: String,
    pub witness: Witness,
    pub p_list: Vec<NormOrder>,
    pub points: Vec<StudyPoint>,
    /// One fit of `‖De‖_p` against ε per entry of `p_list`; `None` when the
    /// errors vanish (self-consistent model) or fewer than two N were run.
    pub fits: Vec<Option<SlopeFit>>,
}

impl ConvergenceTable {
    pub fn rows(&self) -> Vec<ConvergenceRow> {
        let mut out = Vec::new();
        for (k, &p) in self.p_list.iter().enumerate() {
            let mut prev: Option<(f64, f64)> = None;
            for pt in &self.points {
                let y = pt.error_norms[k];
                let running_slope = prev.and_then(|(pe, py)| {
                    (py > 0.0 && y > 0.0).then(|| (y / py).ln() / (pt.epsilon / pe).ln())
                });
                out.push(ConvergenceRow {
                    n: pt.n,
                    epsilon: pt.epsilon,
                    p,
                    error_norm: y,
                    running_slope,
                });
                prev = Some((pt.epsilon, y));
            }
        }
        out
    }

    pub fn fit(&self, p: NormOrder) -> Option<SlopeFit> {
        self.p_list
            .iter()
            .position(|&q| q == p)
            .and_then(|k| self.fits[k])
    }

    /// CSV with columns `model,N,epsilon,p,error_norm,slope_running`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,N,epsilon,p,error_norm,slope_running\n");
        for r in self.rows() {
            let slope = r.running_slope.map(|v| format!("{v:.6}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{:.9e},{},{:.9e},{}\n",
                self.model, r.n, r.epsilon, r.p, r.error_norm, slope
            ));
        }
        s
    }

    /// Whitespace-separated data: `epsilon` then one column per p.
    pub fn to_plot_data(&self) -> String {
        let mut s = format!("# model {} witness {}\n# epsilon", self.model, self.witness.key());
        for p in &self.p_list {
            s.push_str(&format!(" De_p{p}"));
        }
        s.push('\n');
        for pt in &self.points {
            s.push_str(&format!("{:.9e}", pt.epsilon));
            for v in &pt.error_norms {
                s.push_str(&format!(" {v:.9e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// For each N: sample the witness `u`, solve `L^kind u_qc = L^a u` (ghost
/// moved to the right-hand side), and record `‖D(u − u_qc)‖_p`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    kind: &ModelKind<f64>,
    witness: Witness,
    template: &ChainConfig<f64>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<f64>,
    n_list: &[usize],
    p_list: &[NormOrder],
) -> Result<ConvergenceTable> {
    for p in p_list {
        p.validate()?;
    }
    let points: Vec<StudyPoint> = n_list
        .par_iter()
        .map(|&n| study_point(kind, witness, &template.with_n(n)?, partition, potential, p_list))
        .collect::<Result<_>>()?;
    let fits = (0..p_list.len())
        .map(|k| {
            let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.error_norms[k])).collect();
            fit_slope(&pts).ok()
        })
        .collect();
    Ok(ConvergenceTable {
        model: kind.name().to_string(),
        witness,
        p_list: p_list.to_vec(),
        points,
        fits,
    })
}

fn study_point(
    kind: &ModelKind<f64>,
    witness: Witness,
    config: &ChainConfig<f64>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<f64>,
    p_list: &[NormOrder],
) -> Result<StudyPoint> {
    let n = config.n();
    let reference = assemble_with_potential(&ModelKind::Atomistic, config, None, potential)?;
    let op = assemble_with_potential(kind, config, partition, potential)?;
    let u = sample_field(|x| witness.eval(x), n);
    let rhs = reference.apply(&u)?.sub(op.ghost())?;
    let u_qc = solve_equilibrium(&op, &rhs)?;
    let e = u.sub(&u_qc)?;
    let de = strain(&e)?;
    let error_norms = p_list
        .iter()
        .map(|&p| lp_norm(&de, p))
        .collect::<Result<Vec<_>>>()?;
    let linear = op.without_ghost();
    let strain_bound = *to_strain_form(&linear)?.bound();
    Ok(StudyPoint {
        n,
        epsilon: config.epsilon(),
        error_norms,
        strain_sup: de.sup_norm(),
        operator_sup: linear.apply_linear(&e)?.sup_norm(),
        strain_bound,
    })
}
