use super::contour::{ordered_sum, Contour, DEFAULT_NODES};
use super::SpectraError;
use crate::numerics::{eigenvalues, op_norm, resolvent, ComplexMatrix, C64};

/// One eigenvalue cluster found by [`cluster_eigenvalues`].
#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub representative: C64,
    pub members: Vec<usize>,
}

/// Spectral data of one eigenvalue: `X P = λ P + N` on its generalized
/// eigenspace, with `N^ν = 0`.
#[derive(Clone, Debug)]
pub struct SpectralComponent {
    pub lambda: C64,
    pub projector: ComplexMatrix,
    pub nilpotent: ComplexMatrix,
    pub nilpotency_index: usize,
    pub algebraic_multiplicity: usize,
}

/// Projector–nilpotent decomposition `X = Σ_k (λ_k P_k + N_k)`.
///
/// When `complete` is false only the eigenvalues inside an enclosing contour
/// were resolved; the residuals are then measured against the total
/// projector `P_Γ = Σ P_k` (`‖P_Γ² − P_Γ‖` and `‖Σ(λP + N) − X P_Γ‖`).
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub source_dim: usize,
    pub components: Vec<SpectralComponent>,
    pub residual_reconstruction: f64,
    pub residual_resolution: f64,
    pub tol_dec: f64,
    pub tol_nil: f64,
    pub complete: bool,
}

/// Knobs for [`decompose_with`].
///
/// `cluster_tol` decides which computed eigenvalues count as one defective
/// eigenvalue. Perturbing a Jordan block of size `m` by `δ` moves its
/// eigenvalues by about `δ^{1/m}`, so matrices with nontrivial Jordan
/// structure usually need a cluster tolerance far above the default.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecomposeOptions {
    /// Single-linkage distance; `None` means `1e-6·‖X‖`.
    pub cluster_tol: Option<f64>,
    pub tol_dec: f64,
    pub tol_nil: f64,
    /// Quadrature nodes per Riesz contour.
    pub nodes: usize,
}

pub const DEFAULT_CLUSTER_REL_TOL: f64 = 1e-6;
pub const DEFAULT_TOL_DEC: f64 = 1e-9;
pub const DEFAULT_TOL_NIL: f64 = 1e-8;

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            cluster_tol: None,
            tol_dec: DEFAULT_TOL_DEC,
            tol_nil: DEFAULT_TOL_NIL,
            nodes: DEFAULT_NODES,
        }
    }
}

impl DecomposeOptions {
    pub fn with_cluster_tol(mut self, tol: f64) -> Self {
        self.cluster_tol = Some(tol);
        self
    }

    pub fn resolved_cluster_tol(&self, x_norm: f64) -> f64 {
        self.cluster_tol
            .unwrap_or(DEFAULT_CLUSTER_REL_TOL * if x_norm > 0.0 { x_norm } else { 1.0 })
    }
}

/// Single-linkage clustering of eigenvalues at link distance `cluster_tol`.
///
/// Representatives are member means; clusters come back sorted by
/// `(Re, Im)` of the representative, members in ascending index order.
pub fn cluster_eigenvalues(eigs: &[C64], cluster_tol: f64) -> Vec<Cluster> {
    let n = eigs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eigs[i] - eigs[j]).norm() <= cluster_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|members| {
            let sum: C64 = members.iter().map(|&i| eigs[i]).sum();
            Cluster {
                representative: sum / members.len() as f64,
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| cmp_complex(a.representative, b.representative));
    clusters
}

pub(crate) fn cmp_complex(a: C64, b: C64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Riesz projector `(1/2πi)∮ (zI − X)⁻¹ dz` by trapezoidal quadrature.
pub fn riesz_projector(x: &ComplexMatrix, contour: &Contour) -> Result<ComplexMatrix, SpectraError> {
    x.ensure_square()?;
    contour.check_clear(&eigenvalues(x)?)?;
    projector_quadrature(x, contour)
}

fn projector_quadrature(x: &ComplexMatrix, contour: &Contour) -> Result<ComplexMatrix, SpectraError> {
    let n = x.rows();
    ordered_sum(&contour.quadrature(), n, n, |z, w| {
        Ok::<_, SpectraError>(resolvent(x, z)?.scale(w))
    })
}

/// `N = (X − λI)·P`.
pub fn nilpotent_part(x: &ComplexMatrix, lambda: C64, p: &ComplexMatrix) -> ComplexMatrix {
    &x.shifted(lambda) * p
}

/// Smallest `ν ≥ 1` with `‖N^ν‖ ≤ tol_nil·scale^ν`, capped at the dimension.
pub fn nilpotency_index(n: &ComplexMatrix, scale: f64, tol_nil: f64) -> usize {
    let dim = n.rows();
    let mut power = n.clone();
    for nu in 1..dim {
        if op_norm(&power) <= tol_nil * scale.powi(nu as i32) {
            return nu;
        }
        power = &power * n;
    }
    dim
}

/// Full decomposition with explicit tolerances.
pub fn decompose(
    x: &ComplexMatrix,
    cluster_tol: f64,
    tol_dec: f64,
    tol_nil: f64,
) -> Result<Decomposition, SpectraError> {
    decompose_with(
        x,
        &DecomposeOptions {
            cluster_tol: Some(cluster_tol),
            tol_dec,
            tol_nil,
            nodes: DEFAULT_NODES,
        },
    )
}

/// Full decomposition: one component per eigenvalue cluster.
pub fn decompose_with(x: &ComplexMatrix, opts: &DecomposeOptions) -> Result<Decomposition, SpectraError> {
    build(x, opts, None)
}

/// Decomposition restricted to the eigenvalues inside `enclosing`.
pub fn decompose_enclosed(
    x: &ComplexMatrix,
    enclosing: &Contour,
    opts: &DecomposeOptions,
) -> Result<Decomposition, SpectraError> {
    build(x, opts, Some(enclosing))
}

fn build(
    x: &ComplexMatrix,
    opts: &DecomposeOptions,
    enclosing: Option<&Contour>,
) -> Result<Decomposition, SpectraError> {
    let dim = x.ensure_square()?;
    let x_norm = op_norm(x);
    let scale = if x_norm > 0.0 { x_norm } else { 1.0 };
    let cluster_tol = opts.resolved_cluster_tol(x_norm);
    let eigs = eigenvalues(x)?;
    let ev = &eigs;
    if let Some(c) = enclosing {
        c.check_clear(&eigs)?;
    }
    let clusters = cluster_eigenvalues(&eigs, cluster_tol);

    // gap from each cluster to its nearest neighbour cluster
    let gaps: Vec<f64> = clusters
        .iter()
        .enumerate()
        .map(|(k, ck)| {
            clusters
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .flat_map(|(_, cl)| {
                    ck.members.iter().flat_map(|&i| {
                        cl.members.iter().map(move |&j| (ev[i] - ev[j]).norm())
                    })
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    // in enclosed mode only the clusters we keep need to be well separated
    let min_gap = clusters
        .iter()
        .zip(&gaps)
        .filter(|(cl, _)| enclosing.is_none_or(|c| c.encloses(cl.representative)))
        .map(|(_, &g)| g)
        .fold(f64::INFINITY, f64::min);
    if min_gap <= 4.0 * cluster_tol {
        return Err(SpectraError::ClusterSeparation {
            gap: min_gap,
            cluster_tol,
        });
    }

    let mut components = Vec::new();
    for (cluster, &gap) in clusters.iter().zip(&gaps) {
        if let Some(c) = enclosing {
            if !c.encloses(cluster.representative) {
                continue;
            }
        }
        let rep = cluster.representative;
        let spread = cluster
            .members
            .iter()
            .map(|&i| (eigs[i] - rep).norm())
            .fold(0.0, f64::max);
        let radius = if gap.is_finite() {
            gap / 3.0
        } else {
            (10.0 * spread + cluster_tol).max(op_norm(&x.shifted(rep)))
        };
        if radius <= spread {
            return Err(SpectraError::ClusterSeparation {
                gap,
                cluster_tol,
            });
        }
        let contour = Contour::new(rep, radius, opts.nodes)?;
        contour.check_clear(&eigs)?;
        let projector = projector_quadrature(x, &contour)?;

        let p_norm = op_norm(&projector);
        let idem = op_norm(&(&(&projector * &projector) - &projector));
        if idem > opts.tol_dec * p_norm {
            return Err(SpectraError::NotIdempotent {
                lambda: rep,
                residual: idem,
                bound: opts.tol_dec * p_norm,
            });
        }
        let tr = projector.trace();
        let multiplicity = tr.re.round().max(0.0) as usize;
        if multiplicity != cluster.members.len() {
            return Err(SpectraError::MultiplicityMismatch {
                lambda: rep,
                trace: tr.re,
                members: cluster.members.len(),
            });
        }
        let lambda = (x * &projector).trace() / tr;
        let nilpotent = nilpotent_part(x, lambda, &projector);
        let nu = nilpotency_index(&nilpotent, scale, opts.tol_nil);
        if nu > multiplicity {
            return Err(SpectraError::NilpotencyExceedsMultiplicity {
                lambda,
                index: nu,
                multiplicity,
            });
        }
        components.push(SpectralComponent {
            lambda,
            projector,
            nilpotent,
            nilpotency_index: nu,
            algebraic_multiplicity: multiplicity,
        });
    }
    components.sort_by(|a, b| cmp_complex(a.lambda, b.lambda));

    let (residual_resolution, residual_reconstruction) = residuals(x, &components, enclosing.is_none());
    let complete = enclosing.is_none();
    if residual_resolution > opts.tol_dec {
        return Err(SpectraError::ResidualTooLarge {
            which: "resolution of identity",
            residual: residual_resolution,
            bound: opts.tol_dec,
        });
    }
    if residual_reconstruction > opts.tol_dec * scale {
        return Err(SpectraError::ResidualTooLarge {
            which: "reconstruction",
            residual: residual_reconstruction,
            bound: opts.tol_dec * scale,
        });
    }
    Ok(Decomposition {
        source_dim: dim,
        components,
        residual_reconstruction,
        residual_resolution,
        tol_dec: opts.tol_dec,
        tol_nil: opts.tol_nil,
        complete,
    })
}

/// `(resolution, reconstruction)` residuals.
fn residuals(x: &ComplexMatrix, components: &[SpectralComponent], complete: bool) -> (f64, f64) {
    let n = x.rows();
    let mut p_sum = ComplexMatrix::zeros(n, n);
    let mut recon = ComplexMatrix::zeros(n, n);
    for c in components {
        p_sum = &p_sum + &c.projector;
        recon = &(&recon + &c.projector.scale(c.lambda)) + &c.nilpotent;
    }
    if complete {
        (
            op_norm(&p_sum.shifted(C64::new(1.0, 0.0))),
            op_norm(&(&recon - x)),
        )
    } else {
        (
            op_norm(&(&(&p_sum * &p_sum) - &p_sum)),
            op_norm(&(&recon - &(x * &p_sum))),
        )
    }
}

impl Decomposition {
    pub fn eigenvalues(&self) -> Vec<C64> {
        self.components.iter().map(|c| c.lambda).collect()
    }

    /// `Σ_k P_k`: the identity for a complete decomposition.
    pub fn total_projector(&self) -> ComplexMatrix {
        let n = self.source_dim;
        self.components
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, c| &acc + &c.projector)
    }

    /// `Σ_k (λ_k P_k + N_k)`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.source_dim;
        self.components.iter().fold(ComplexMatrix::zeros(n, n), |acc, c| {
            &(&acc + &c.projector.scale(c.lambda)) + &c.nilpotent
        })
    }

    pub fn max_nilpotency_index(&self) -> usize {
        self.components
            .iter()
            .map(|c| c.nilpotency_index)
            .max()
            .unwrap_or(1)
    }

    /// Zero-extends every projector and nilpotent to `dim × dim`.
    ///
    /// The result describes the same eigenvalues of the zero-padded matrix
    /// and is therefore always partial.
    pub fn embed(&self, dim: usize) -> Decomposition {
        let mut out = self.clone();
        out.source_dim = dim;
        out.complete = self.complete && dim == self.source_dim;
        for c in &mut out.components {
            c.projector = c.projector.embed(dim);
            c.nilpotent = c.nilpotent.embed(dim);
        }
        out
    }
}

/// Residual of every decomposition invariant plus a pass/fail verdict.
#[derive(Clone, Debug, Default)]
pub struct DecompositionDiagnostics {
    /// `max_k ‖P_k² − P_k‖`.
    pub idempotence: f64,
    /// `max_k max(‖P_k N_k − N_k‖, ‖N_k P_k − N_k‖)`.
    pub commutation: f64,
    /// `max_k ‖N_k^{ν_k}‖ / ‖X‖^{ν_k}`.
    pub nilpotency: f64,
    /// `max_k ‖N_k‖ / ‖X‖`.
    pub nilpotent_norm: f64,
    /// `max_{k≠l} ‖P_k P_l‖`.
    pub cross_orthogonality: f64,
    pub resolution: f64,
    /// `‖Σ(λP + N) − X‖ / ‖X‖` (or against `X P_Γ` for partial decompositions).
    pub reconstruction: f64,
    pub multiplicity_sum: usize,
    pub failures: Vec<String>,
}

impl DecompositionDiagnostics {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recomputes every invariant of `dec` against `x`.
pub fn verify_decomposition(dec: &Decomposition, x: &ComplexMatrix) -> DecompositionDiagnostics {
    assert_eq!(x.rows(), dec.source_dim, "dimension mismatch");
    let x_norm = op_norm(x);
    let scale = if x_norm > 0.0 { x_norm } else { 1.0 };
    let mut d = DecompositionDiagnostics::default();
    let tol = dec.tol_dec;

    for c in &dec.components {
        let p = &c.projector;
        let n = &c.nilpotent;
        let p_norm = op_norm(p);
        let idem = op_norm(&(&(p * p) - p));
        d.idempotence = d.idempotence.max(idem);
        if idem > tol * p_norm {
            d.failures.push(format!(
                "idempotence at λ={}: {idem:.3e} > {:.3e}",
                c.lambda,
                tol * p_norm
            ));
        }
        let n_norm = op_norm(n);
        let comm = op_norm(&(&(p * n) - n)).max(op_norm(&(&(n * p) - n)));
        d.commutation = d.commutation.max(comm);
        if comm > tol * n_norm.max(1.0) {
            d.failures
                .push(format!("P N = N P = N at λ={}: {comm:.3e}", c.lambda));
        }
        d.nilpotent_norm = d.nilpotent_norm.max(n_norm / scale);
        let nu = c.nilpotency_index.max(1);
        let top = op_norm(&n.pow(nu)) / scale.powi(nu as i32);
        d.nilpotency = d.nilpotency.max(top);
        if top > dec.tol_nil {
            d.failures
                .push(format!("N^ν ≠ 0 at λ={} (ν={nu}): {top:.3e}", c.lambda));
        }
        if nu > 1 {
            let below = op_norm(&n.pow(nu - 1)) / scale.powi(nu as i32 - 1);
            if below <= dec.tol_nil {
                d.failures
                    .push(format!("ν={nu} not minimal at λ={}", c.lambda));
            }
        }
        if nu > c.algebraic_multiplicity {
            d.failures.push(format!(
                "ν={nu} exceeds multiplicity {} at λ={}",
                c.algebraic_multiplicity, c.lambda
            ));
        }
        d.multiplicity_sum += c.algebraic_multiplicity;
    }
    for (k, a) in dec.components.iter().enumerate() {
        for (l, b) in dec.components.iter().enumerate() {
            if k != l {
                d.cross_orthogonality = d
                    .cross_orthogonality
                    .max(op_norm(&(&a.projector * &b.projector)));
            }
        }
    }
    if d.cross_orthogonality > tol {
        d.failures
            .push(format!("cross-orthogonality {:.3e}", d.cross_orthogonality));
    }
    let (res, recon) = residuals(x, &dec.components, dec.complete);
    d.resolution = res;
    d.reconstruction = recon / scale;
    if res > tol {
        d.failures.push(format!("resolution of identity {res:.3e}"));
    }
    if d.reconstruction > tol {
        d.failures
            .push(format!("reconstruction {:.3e}", d.reconstruction));
    }
    if dec.complete && d.multiplicity_sum != dec.source_dim {
        d.failures.push(format!(
            "multiplicities sum to {} instead of {}",
            d.multiplicity_sum, dec.source_dim
        ));
    }
    d
}
