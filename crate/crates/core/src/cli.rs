//! Command-line front end: config loading, command dispatch and output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::acceptance;
use crate::chain::{sample_field, PeriodicField};
use crate::config::{parse_config, RunConfig};
use crate::consistency::{consistency_sweep, ghost_sweep, moment_residuals, Moment};
use crate::convergence::convergence_study;
use crate::error::{QcError, Result};
use crate::impossibility::{certify_range, ConstraintSystem};
use crate::model::{assemble_operator, assemble_with_potential, total_energy, LinearChainOperator, ModelKind};
use crate::partition::RegionPartition;
use crate::scalar::Scalar;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "qclab", version, about = "One-dimensional quasicontinuum laboratory")]
pub struct Cli {
    /// Key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write tabular output here instead of standard output; plot data goes
    /// next to it with extension `.dat`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use rational arithmetic where the command supports it.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Append a human-readable summary to standard output.
    #[arg(long, global = true)]
    pub report: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Total energy of the witness displacement.
    Energy,
    /// Operator rows.
    Stencil,
    /// Polynomial moment residuals against the atomistic operator.
    Moments,
    /// Ghost-force sup-norm over N_list.
    Ghost,
    /// Smooth-field consistency residual over N_list.
    Sweep,
    /// Exact certificates and least-squares residuals over m_list.
    Certify,
    /// Error norms of the equilibrium solution over N_list.
    Converge,
    /// Runs the acceptance suite.
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::Stencil => "stencil",
            Command::Moments => "moments",
            Command::Ghost => "ghost",
            Command::Sweep => "sweep",
            Command::Certify => "certify",
            Command::Converge => "converge",
            Command::Selftest => "selftest",
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Output {
    /// Header line plus CSV.
    pub data: String,
    pub plot: Option<String>,
    pub report: Vec<String>,
    /// False when a check ran to completion but did not pass.
    pub success: bool,
}

fn header(command: Command) -> String {
    format!("# qclab {VERSION} {}\n", command.name())
}

fn ok(command: Command, body: String, plot: Option<String>, report: Vec<String>) -> Output {
    Output {
        data: header(command) + &body,
        plot: plot.map(|p| header(command) + &p),
        report,
        success: true,
    }
}

/// Runs `command` on a parsed configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::Energy => energy(cfg),
        Command::Stencil => {
            if cfg.exact {
                stencil(cfg, &exact_operator(cfg)?)
            } else {
                stencil(cfg, &float_operator(cfg)?)
            }
        }
        Command::Moments => {
            if cfg.exact {
                let kind = cfg.model_exact()?;
                let chain = cfg.chain_exact(cfg.n)?;
                let part = cfg.region_for(kind.needs_partition())?;
                let moduli = cfg.moduli_exact()?;
                let op = assemble_operator(&kind, &chain, part.as_ref(), &moduli)?;
                let reference = assemble_operator(&ModelKind::Atomistic, &chain, None, &moduli)?;
                moments(cfg, &op, &reference)
            } else {
                let op = float_operator(cfg)?;
                let chain = cfg.chain(cfg.n)?;
                let reference =
                    assemble_with_potential(&ModelKind::Atomistic, &chain, None, &cfg.potential_f64()?)?;
                moments(cfg, &op, &reference)
            }
        }
        Command::Ghost => {
            let kind = cfg.model_f64()?;
            let part = cfg.region_for(kind.needs_partition())?;
            let s = ghost_sweep(&kind, &cfg.chain(cfg.n)?, part.as_ref(), &cfg.potential_f64()?, &cfg.n_list)?;
            let ratios: Vec<String> = s.ratios().iter().map(|r| format!("{r:.4}")).collect();
            let report = vec![
                format!("ghost force of {} over N = {:?}", s.model, cfg.n_list),
                format!("consecutive ratios: [{}]", ratios.join(", ")),
                slope_line(s.slope()),
            ];
            Ok(ok(command, s.to_csv(), Some(s.to_plot_data()), report))
        }
        Command::Sweep => {
            let kind = cfg.model_f64()?;
            let part = cfg.region_for(kind.needs_partition())?;
            let s = consistency_sweep(
                &kind,
                cfg.witness,
                &cfg.chain(cfg.n)?,
                part.as_ref(),
                &cfg.potential_f64()?,
                &cfg.n_list,
            )?;
            let report = vec![
                format!("consistency residual of {} against atomistic, witness {}", s.model, cfg.witness),
                slope_line(s.slope()),
                format!("smallest residual {:.6e}", s.min_residual()),
            ];
            Ok(ok(command, s.to_csv(), Some(s.to_plot_data()), report))
        }
        Command::Certify => certify(cfg),
        Command::Converge => {
            let kind = cfg.model_f64()?;
            let part = cfg.region_for(kind.needs_partition())?;
            let t = convergence_study(
                &kind,
                cfg.witness,
                &cfg.chain(cfg.n)?,
                part.as_ref(),
                &cfg.potential_f64()?,
                &cfg.n_list,
                &cfg.p_list,
            )?;
            let mut report = vec![format!("error norms of {} with witness {}", t.model, cfg.witness)];
            for (p, fit) in t.p_list.iter().zip(&t.fits) {
                report.push(match fit {
                    Some(f) => format!(
                        "p = {p}: slope {:.4} (expected bound 1+1/p = {:.4}), r^2 {:.6}",
                        f.slope,
                        1.0 + p.reciprocal(),
                        f.r_squared
                    ),
                    None => format!("p = {p}: no fit (errors vanish)"),
                });
            }
            let holds = t.points.iter().all(|pt| pt.stability_inequality_holds());
            report.push(format!("stability inequality on every row: {holds}"));
            Ok(ok(command, t.to_csv(), Some(t.to_plot_data()), report))
        }
        Command::Selftest => {
            let reports = acceptance::run_all();
            let mut body = String::new();
            for r in &reports {
                body.push_str(&format!("{r}\n"));
            }
            let passed = reports.iter().filter(|r| r.passed).count();
            let mut out = ok(
                command,
                body,
                None,
                vec![format!("{passed} of {} criteria passed", reports.len())],
            );
            out.success = passed == reports.len();
            Ok(out)
        }
    }
}

fn slope_line(slope: Option<f64>) -> String {
    match slope {
        Some(s) => format!("fitted exponent against epsilon: {s:.4}"),
        None => "fitted exponent against epsilon: none (a residual vanishes)".into(),
    }
}

fn float_operator(cfg: &RunConfig) -> Result<LinearChainOperator<f64>> {
    let kind = cfg.model_f64()?;
    let part = cfg.region_for(kind.needs_partition())?;
    assemble_with_potential(&kind, &cfg.chain(cfg.n)?, part.as_ref(), &cfg.potential_f64()?)
}

fn exact_operator(cfg: &RunConfig) -> Result<LinearChainOperator<crate::Rational>> {
    let kind = cfg.model_exact()?;
    let part = cfg.region_for(kind.needs_partition())?;
    assemble_operator(&kind, &cfg.chain_exact(cfg.n)?, part.as_ref(), &cfg.moduli_exact()?)
}

fn labels(cfg: &RunConfig, needs: bool, n: usize) -> Result<Vec<&'static str>> {
    let part: RegionPartition = match cfg.region_for(needs)? {
        Some(p) => p,
        None => {
            let name = match cfg.model.name() {
                "continuum" => "interior_continuum",
                _ => "interior_atomistic",
            };
            return Ok(vec![name; n]);
        }
    };
    let l = part.classify(n)?;
    Ok(l.labels().iter().map(|a| a.name()).collect())
}

fn stencil<T: Scalar>(cfg: &RunConfig, op: &LinearChainOperator<T>) -> Result<Output> {
    let needs = cfg.model_f64()?.needs_partition();
    let names = labels(cfg, needs, op.n())?;
    let mut body = String::from("atom,label,stencil,ghost\n");
    for i in 1..=op.n() {
        body.push_str(&format!(
            "{i},{},{},{}\n",
            names[i - 1],
            op.row(i as i64),
            op.ghost().values()[i - 1]
        ));
    }
    let report = vec![
        format!("{} operator on N = {} ({} distinct rows)", cfg.model.name(), op.n(), op.distinct_rows()),
        format!("symmetry defect {}", op.symmetry_defect()),
        format!("ghost field present: {}", op.has_ghost()),
    ];
    Ok(ok(Command::Stencil, body, None, report))
}

fn moments<T: Scalar>(
    cfg: &RunConfig,
    op: &LinearChainOperator<T>,
    reference: &LinearChainOperator<T>,
) -> Result<Output> {
    let r = moment_residuals(op, reference)?;
    let mut body = String::from("atom,rho_1,rho_j,rho_j2\n");
    for i in 1..=r.n() {
        let [a, b, c] = r.row(i);
        body.push_str(&format!("{i},{a},{b},{c}\n"));
    }
    let zero = T::zero();
    let mut report = vec![format!("moment residuals of {} against atomistic, N = {}", cfg.model.name(), r.n())];
    for p in Moment::ALL {
        report.push(format!(
            "p = {p}: max |rho| = {}, nonzero rows {:?}",
            r.max_abs(p),
            r.nonzero_rows(p, &zero)
        ));
    }
    Ok(ok(Command::Moments, body, None, report))
}

fn energy(cfg: &RunConfig) -> Result<Output> {
    let kind = cfg.model_f64()?;
    if !kind.is_energy_based() {
        return Err(QcError::NoEnergy(kind.name()));
    }
    let part = cfg.region_for(kind.needs_partition())?;
    let chain = cfg.chain(cfg.n)?;
    let pot = cfg.potential_f64()?;
    let witness = cfg.witness;
    let u = sample_field(|x: f64| cfg.amplitude * witness.eval(x), cfg.n);
    let e = total_energy(&kind, &chain, part.as_ref(), &pot, &u)?;
    let e0 = total_energy(&kind, &chain, part.as_ref(), &pot, &PeriodicField::zeros(cfg.n))?;
    let body = format!(
        "model,N,F,potential,witness,amplitude,energy,energy_uniform\n{},{},{},{},{},{},{:.15e},{:.15e}\n",
        kind.name(),
        cfg.n,
        cfg.deformation,
        pot.name(),
        witness.key(),
        cfg.amplitude,
        e,
        e0
    );
    let report = vec![
        format!("{} energy at N = {}: {e:.15e}", kind.name(), cfg.n),
        format!("uniform deformation energy: {e0:.15e}"),
    ];
    Ok(ok(Command::Energy, body, None, report))
}

fn certify(cfg: &RunConfig) -> Result<Output> {
    let records = certify_range(&cfg.m_list)?;
    let mut body = format!("{}\n", crate::impossibility::CertifyRecord::csv_header());
    let mut report = Vec::new();
    for r in &records {
        body.push_str(&r.csv_row());
        body.push('\n');
        let system = ConstraintSystem::new(r.m)?;
        report.push(format!(
            "m = {}: weights i^2 on the j-moment and -i on the j^2-moment of each row cancel all {} unknowns of {} equations exactly; weighted constant {} (nonzero, so no symmetric block exists); least-squares residual {:.6e} >= bound {:.6e}",
            r.m,
            system.unknowns().len(),
            system.equations().len(),
            r.value,
            r.min_residual,
            r.bound
        ));
    }
    Ok(ok(Command::Certify, body, None, report))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| QcError::Io(format!("{}: {e}", path.display())))
}

/// Loads the configuration, runs the command, writes outputs; returns the
/// process exit code.
pub fn run(cli: &Cli) -> i32 {
    match try_run(cli) {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("qclab: {e}");
            e.exit_code()
        }
    }
}

fn try_run(cli: &Cli) -> Result<bool> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| QcError::Io(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text)?;
    cfg.exact |= cli.exact;
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    let output = execute(cli.command, &cfg)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match &cfg.out {
        Some(path) => {
            write_file(path, &output.data)?;
            if let Some(plot) = &output.plot {
                write_file(&path.with_extension("dat"), plot)?;
            }
        }
        None => lock.write_all(output.data.as_bytes())?,
    }
    if cli.report {
        for line in &output.report {
            writeln!(lock, "{line}")?;
        }
    }
    Ok(output.success)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text).unwrap()
    }

    #[test]
    fn energy_rejects_force_based_model() {
        let e = execute(Command::Energy, &cfg("model=qcf")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn outputs_start_with_version_header() {
        let out = execute(Command::Stencil, &cfg("N=32")).unwrap();
        assert!(out.data.starts_with(&format!("# qclab {VERSION} stencil\natom,label,stencil,ghost\n")));
        assert_eq!(out.data.lines().count(), 2 + 32);
    }

    #[test]
    fn exact_and_float_stencils_agree_in_shape() {
        let exact = execute(Command::Stencil, &cfg("model=qce\nN=32\nexact=true")).unwrap();
        assert!(exact.data.contains("6/5") || exact.data.contains("interface"));
        let float = execute(Command::Stencil, &cfg("model=qce\nN=32")).unwrap();
        assert_eq!(exact.data.lines().count(), float.data.lines().count());
    }

    #[test]
    fn certify_rows() {
        let out = execute(Command::Certify, &cfg("m_list=1..3")).unwrap();
        let lines: Vec<&str> = out.data.lines().collect();
        assert_eq!(lines[1], "m,value,min_residual,bound");
        assert!(lines[2].starts_with("1,-2,"));
        assert_eq!(lines.len(), 5);
    }

    #[test]
    fn deterministic() {
        let c = cfg("model=qnl\nN_list=64,128");
        let a = execute(Command::Sweep, &c).unwrap();
        let b = execute(Command::Sweep, &c).unwrap();
        assert_eq!(a, b);
    }
}
