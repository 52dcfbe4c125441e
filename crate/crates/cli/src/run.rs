use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pnfc_core::approx::{
    build_model, convergence_csv, default_probes, level_experiment, level_experiment_audited,
    multivariate_experiment, perturbation_experiment, regularization_csv, regularization_sweep,
    report_file_name, ConvergenceReport, FactorSetup, LevelSetup, ModelKind, OperatorModel, STABILITY_TOL,
};
use pnfc_core::calculus::{
    dunford_multivariate_with, func_multivariate, func_univariate, ledger_csv, lift, power_series_apply_auto,
    write_split, DunfordOptions,
};
use pnfc_core::funcspace::AnalyticFunction;
use pnfc_core::numerics::{eigenvalues, read_cmat_file, write_cmat, ComplexMatrix, C64};
use pnfc_core::spectra::{decompose_with, verify_decomposition, write_decomposition, Contour, DecomposeOptions};

use crate::artifacts::ArtifactWriter;
use crate::config::{Command, Config, ContourSpec};
use crate::CliError;

const DEFAULT_OUT: &str = "pnfc-out";

/// Runs `command` and writes its artifacts plus `manifest.csv` into the
/// output directory (`out`, else `output_dir` from the config, else
/// `./pnfc-out`). A tolerance failure still writes every artifact.
pub fn run(cfg: &Config, command: Command, out: Option<&Path>, seed: Option<u64>) -> Result<PathBuf, CliError> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(CliError::Parse(format!(
                "config is for `{}` but `{}` was requested",
                c.name(),
                command.name()
            )));
        }
    }
    let dir = match (out, &cfg.output_dir) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => cfg.resolve(d),
        (None, None) => PathBuf::from(DEFAULT_OUT),
    };
    let seed = seed.unwrap_or(cfg.seed);
    // inputs are validated before anything is written
    let job = Job::prepare(cfg, command)?;
    let mut w = ArtifactWriter::new(dir)?;
    let verdict = job.execute(cfg, seed, &mut w);
    let manifest = match &verdict {
        Ok(()) | Err(CliError::Tolerance(_)) => w.finish()?,
        Err(_) => return verdict.map(|_| PathBuf::new()),
    };
    verdict.map(|_| manifest)
}

struct Job {
    command: Command,
    matrices: Vec<ComplexMatrix>,
    function: Option<AnalyticFunction>,
}

impl Job {
    fn prepare(cfg: &Config, command: Command) -> Result<Self, CliError> {
        let matrices = cfg
            .input
            .matrices
            .iter()
            .map(|p| read_cmat_file(&cfg.resolve(p)))
            .collect::<Result<Vec<_>, _>>()?;
        let function = cfg.input.function.as_deref().map(AnalyticFunction::parse).transpose()?;
        let needs_matrices = matches!(
            command,
            Command::Decompose | Command::Funcalc | Command::LiftCalc | Command::OracleCheck
        );
        if needs_matrices && matrices.is_empty() {
            return Err(CliError::Parse(format!("`{}` needs input.matrices", command.name())));
        }
        if command != Command::Decompose && command != Command::Regularize && function.is_none() {
            return Err(CliError::Parse(format!("`{}` needs input.function", command.name())));
        }
        Ok(Self {
            command,
            matrices,
            function,
        })
    }

    fn f(&self) -> &AnalyticFunction {
        self.function.as_ref().expect("checked in prepare")
    }

    fn with_arity(&self, r: usize) -> Result<AnalyticFunction, CliError> {
        Ok(self.f().clone().with_arity(r)?)
    }

    fn execute(&self, cfg: &Config, seed: u64, w: &mut ArtifactWriter) -> Result<(), CliError> {
        let opts = decompose_options(cfg);
        match self.command {
            Command::Decompose => self.decompose(&opts, w),
            Command::Funcalc => {
                if self.matrices.len() != 1 {
                    return Err(CliError::Parse("funcalc takes exactly one matrix".into()));
                }
                let f = self.with_arity(1)?;
                let dec = decompose_with(&self.matrices[0], &opts)?;
                w.write("value.cmat", &write_cmat(&func_univariate(&f, &dec)?))
            }
            Command::LiftCalc => {
                let f = self.with_arity(self.matrices.len())?;
                let sys = lift(&self.matrices, &opts)?;
                let res = func_multivariate(&f, &sys)?;
                w.write("value.cmat", &write_cmat(&res.value))?;
                w.write("split.txt", &write_split(&res))?;
                w.write("ledger.csv", &ledger_csv(&res.term_ledger))
            }
            Command::OracleCheck => self.oracle_check(cfg, &opts, w),
            Command::Converge => self.converge(cfg, &opts, seed, w),
            Command::ConvergeMulti => self.converge_multi(cfg, &opts, w),
            Command::Regularize => self.regularize(cfg, w),
        }
    }

    fn decompose(&self, opts: &DecomposeOptions, w: &mut ArtifactWriter) -> Result<(), CliError> {
        let mut comps = String::from("matrix,component,lambda_re,lambda_im,algebraic_multiplicity,nilpotency_index\n");
        let mut diags = String::from(
            "matrix,idempotence,commutation,nilpotency,cross_orthogonality,resolution,reconstruction,pass\n",
        );
        let mut failed = Vec::new();
        for (i, x) in self.matrices.iter().enumerate() {
            let dec = decompose_with(x, opts)?;
            w.write(&format!("decomposition_{i}.txt"), &write_decomposition(&dec))?;
            for (k, c) in dec.components.iter().enumerate() {
                writeln!(
                    comps,
                    "{i},{k},{:.16e},{:.16e},{},{}",
                    c.lambda.re, c.lambda.im, c.algebraic_multiplicity, c.nilpotency_index
                )
                .unwrap();
            }
            let d = verify_decomposition(&dec, x);
            writeln!(
                diags,
                "{i},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                d.idempotence,
                d.commutation,
                d.nilpotency,
                d.cross_orthogonality,
                d.resolution,
                d.reconstruction,
                d.pass()
            )
            .unwrap();
            if !d.pass() {
                failed.push(format!("matrix {i}: {}", d.failures.join("; ")));
            }
        }
        w.write("components.csv", &comps)?;
        w.write("diagnostics.csv", &diags)?;
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Tolerance(format!("spectra: {}", failed.join(" | "))))
        }
    }

    fn oracle_check(&self, cfg: &Config, opts: &DecomposeOptions, w: &mut ArtifactWriter) -> Result<(), CliError> {
        let k = &cfg.oracle;
        let f = self.with_arity(self.matrices.len())?;
        let sys = lift(&self.matrices, opts)?;
        let contours = sys
            .decompositions
            .iter()
            .map(|d| {
                let eigs = d.eigenvalues();
                let center = eigs.iter().sum::<C64>() / eigs.len() as f64;
                let spread = eigs.iter().map(|e| (e - center).norm()).fold(0.0, f64::max);
                Contour::new(center, spread + k.margin, k.nodes)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let expansion = func_multivariate(&f, &sys)?.value;
        let dunford = dunford_multivariate_with(&f, &sys, &contours, &DunfordOptions::default())?;
        let (series, cap) = power_series_apply_auto(&f, &sys, None, k.max_degree)?;
        let pairs = [
            ("expansion-dunford", expansion.dist(&dunford)),
            ("expansion-power_series", expansion.dist(&series)),
            ("dunford-power_series", dunford.dist(&series)),
        ];
        let mut csv = String::from("pair,discrepancy\n");
        for (name, d) in pairs {
            writeln!(csv, "{name},{d:.16e}").unwrap();
        }
        writeln!(csv, "power_series_degree,{cap}").unwrap();
        w.write("value.cmat", &write_cmat(&expansion))?;
        w.write("oracle.csv", &csv)?;
        let worst = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
        if worst > k.tolerance {
            return Err(CliError::Tolerance(format!(
                "calculus: oracle discrepancy {worst:.3e} > {:.3e}",
                k.tolerance
            )));
        }
        Ok(())
    }

    fn model(&self, name: &str, ref_dim: usize, guard: usize) -> Result<OperatorModel, CliError> {
        match ModelKind::from_name(name) {
            Some(ModelKind::Custom) => {
                let x = self
                    .matrices
                    .first()
                    .ok_or_else(|| CliError::Parse("custom_file model needs input.matrices".into()))?;
                Ok(OperatorModel::custom(x.clone())?)
            }
            Some(kind) => Ok(build_model(kind, ref_dim, guard)?),
            None => Err(CliError::Parse(format!("unknown model `{name}`"))),
        }
    }

    fn converge(&self, cfg: &Config, opts: &DecomposeOptions, seed: u64, w: &mut ArtifactWriter) -> Result<(), CliError> {
        let k = &cfg.converge;
        let f = self.with_arity(1)?;
        let model = self.model(&k.model, k.ref_dim, k.guard)?;
        let z0 = c64(k.z0);
        let contour = match &k.contour {
            Some(spec) => contour(spec)?,
            None => default_contour(&model)?,
        };
        let (report, metric) = if k.deltas.is_empty() {
            if k.n_list.is_empty() {
                return Err(CliError::Parse("converge.n_list is empty".into()));
            }
            let n_min = *k.n_list.iter().min().expect("nonempty");
            let mut setup = LevelSetup::new(z0, contour, k.n_list.clone());
            setup.opts = *opts;
            setup.probes = default_probes(k.probes.min(n_min), model.ref_dim);
            let report = if k.audit && model.kind != ModelKind::Custom {
                level_experiment_audited(model.kind, k.ref_dim, k.guard, &f, &setup)?
            } else {
                level_experiment(&model, &f, &setup)?
            };
            (report, "level")
        } else {
            (perturbation_experiment(&model, &f, z0, &contour, &k.deltas, seed)?, "perturbation")
        };
        let name = report_file_name(model.name(), &cfg.input.label, metric);
        w.write(&name, &convergence_csv(&report))?;
        w.write("summary.csv", &summary(&report))?;
        verdict(&report)
    }

    fn converge_multi(&self, cfg: &Config, opts: &DecomposeOptions, w: &mut ArtifactWriter) -> Result<(), CliError> {
        let k = &cfg.converge_multi;
        if k.factors.is_empty() || k.n_list.is_empty() {
            return Err(CliError::Parse("converge_multi needs factors and n_list".into()));
        }
        let f = self.with_arity(k.factors.len())?;
        let factors = k
            .factors
            .iter()
            .map(|fk| {
                Ok(FactorSetup {
                    model: self.model(&fk.model, fk.ref_dim, fk.guard)?,
                    z0: c64(fk.z0),
                    contour: contour(&fk.contour)?,
                    truncate: fk.truncate,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let report = multivariate_experiment(&factors, &f, &k.n_list, opts)?;
        let model = factors.iter().map(|s| s.model.name()).collect::<Vec<_>>().join("-");
        w.write(&report_file_name(&model, &cfg.input.label, "multi"), &convergence_csv(&report))?;
        w.write("summary.csv", &summary(&report))?;
        verdict(&report)
    }

    fn regularize(&self, cfg: &Config, w: &mut ArtifactWriter) -> Result<(), CliError> {
        let k = &cfg.regularize;
        let x = self.model(&k.model, k.ref_dim, k.guard)?;
        let kk = self.model(&k.k_model, k.ref_dim, k.guard)?;
        if !kk.matrix_ref.is_hermitian(1e-12 * kk.matrix_ref.max_abs()) {
            return Err(CliError::Numeric {
                module: "approx",
                msg: format!("regularizer `{}` is not Hermitian", k.k_model),
            });
        }
        let probes = default_probes(k.probes, x.ref_dim);
        let report = regularization_sweep(&x.matrix_ref, &kk.matrix_ref, &k.eps, c64(k.z0), &probes)?;
        let label = if cfg.input.label == "f" { "resolvent" } else { cfg.input.label.as_str() };
        w.write(&report_file_name(x.name(), label, "regularization"), &regularization_csv(&report))?;
        let mut s = String::from("key,value\n");
        writeln!(s, "sup_resolvent,{:.16e}", report.sup_resolvent).unwrap();
        writeln!(s, "probes_decreasing,{}", report.probes_decreasing).unwrap();
        writeln!(s, "bound_pass,{}", report.bound_pass).unwrap();
        w.write("summary.csv", &s)?;
        if !report.bound_pass {
            return Err(CliError::Tolerance("approx: regularization bound violated".into()));
        }
        Ok(())
    }
}

fn decompose_options(cfg: &Config) -> DecomposeOptions {
    let k = &cfg.decompose;
    DecomposeOptions {
        cluster_tol: k.cluster_tol,
        tol_dec: k.tol_dec,
        tol_nil: k.tol_nil,
        nodes: k.nodes,
    }
}

fn c64(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn contour(spec: &ContourSpec) -> Result<Contour, CliError> {
    Ok(Contour::new(c64(spec.center), spec.radius, spec.nodes)?)
}

/// Circle around the lowest eigenvalues: `{1, 3, 5}` for the harmonic
/// model, the ground state otherwise.
fn default_contour(model: &OperatorModel) -> Result<Contour, CliError> {
    let spec = match model.kind {
        ModelKind::Harmonic => ContourSpec {
            center: [3.0, 0.0],
            radius: 2.5,
            nodes: pnfc_core::spectra::DEFAULT_NODES,
        },
        ModelKind::AnharmonicX4 | ModelKind::ComplexHarmonic => {
            let mut eigs = eigenvalues(&model.matrix_ref)?;
            eigs.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            let (e0, e1) = (eigs[0], eigs[1]);
            // stays clear of the padded zero and of the next eigenvalue
            let radius = 0.8 * e0.norm().min((e1 - e0).norm() / 2.0);
            ContourSpec {
                center: [e0.re, e0.im],
                radius,
                nodes: pnfc_core::spectra::DEFAULT_NODES,
            }
        }
        ModelKind::JordanToy | ModelKind::Custom => {
            return Err(CliError::Parse(format!(
                "converge.contour is required for model `{}`",
                model.name()
            )))
        }
    };
    contour(&spec)
}

fn summary(r: &ConvergenceReport) -> String {
    let mut s = String::from("key,value\n");
    writeln!(s, "model,{}", r.model).unwrap();
    writeln!(s, "c_f,{:.16e}", r.constant.c_f).unwrap();
    writeln!(s, "contour_length,{:.16e}", r.constant.length).unwrap();
    writeln!(s, "m_f,{:.16e}", r.constant.m_f).unwrap();
    for (j, (a, b)) in r.constant.sup_rn.iter().zip(&r.constant.sup_r).enumerate() {
        writeln!(s, "sup_rn_{j},{a:.16e}").unwrap();
        writeln!(s, "sup_r_{j},{b:.16e}").unwrap();
    }
    writeln!(s, "level1_pass,{}", r.level1_pass).unwrap();
    writeln!(s, "level2_pass,{}", r.level2_pass).unwrap();
    if let Some(st) = r.reference_stability {
        writeln!(s, "reference_stability,{st:.16e}").unwrap();
    }
    s
}

fn verdict(r: &ConvergenceReport) -> Result<(), CliError> {
    if !r.level2_pass {
        return Err(CliError::Tolerance("approx: Level-2 bound violated".into()));
    }
    if let Some(st) = r.reference_stability.filter(|&st| st > STABILITY_TOL) {
        return Err(CliError::Tolerance(format!(
            "approx: reference stability {st:.3e} > {STABILITY_TOL}"
        )));
    }
    Ok(())
}
