//! Interface space and the coupled problem.
//!
//! The global interface numbering glues the condensed subdomains together:
//! boolean assembly maps inject each subdomain's interface DOFs into the
//! global vector, and per-patch interpolators transfer displacements to the
//! refined meshes (and reactions back). The assembled coarse interface
//! operator is factored once; the assembled reference operator provides the
//! oracle every iteration engine is checked against.

use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::interp::SparseInterp;
use crate::schur::SchurHandle;

/// Global interface numbering with per-subdomain assembly maps and
/// interpolators. `interpolators[s]` is `None` for coarse-only subdomains
/// (the complementary zone).
#[derive(Debug, Clone)]
pub struct InterfaceSpace {
    pub n_global: usize,
    /// `assembly_maps[s][k]` is the global index of local interface DOF `k`.
    pub assembly_maps: Vec<Vec<usize>>,
    pub interpolators: Vec<Option<SparseInterp>>,
    pub has_complementary: bool,
}

impl InterfaceSpace {
    pub fn new(
        n_global: usize,
        assembly_maps: Vec<Vec<usize>>,
        interpolators: Vec<Option<SparseInterp>>,
    ) -> Result<Self> {
        if assembly_maps.len() != interpolators.len() {
            return Err(Error::DimensionMismatch(
                "one interpolator slot per subdomain required".into(),
            ));
        }
        let has_complementary = interpolators.iter().any(|j| j.is_none());
        let space = InterfaceSpace {
            n_global,
            assembly_maps,
            interpolators,
            has_complementary,
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        let mut coverage = vec![0_usize; self.n_global];
        for (s, map) in self.assembly_maps.iter().enumerate() {
            let mut seen = vec![false; self.n_global];
            for &g in map {
                if g >= self.n_global {
                    return Err(Error::DimensionMismatch(format!(
                        "subdomain {s}: assembly map entry {g} exceeds global size {}",
                        self.n_global
                    )));
                }
                if seen[g] {
                    return Err(Error::InvalidLayout(format!(
                        "subdomain {s}: assembly map targets global DOF {g} twice"
                    )));
                }
                seen[g] = true;
                coverage[g] += 1;
            }
        }
        let min_required = if self.has_complementary { 2 } else { 1 };
        if let Some(g) = coverage.iter().position(|&c| c < min_required) {
            return Err(Error::InvalidLayout(format!(
                "global interface DOF {g} is touched by {} subdomain(s); at least {min_required} required",
                coverage[g]
            )));
        }
        Ok(())
    }

    pub fn n_subdomains(&self) -> usize {
        self.assembly_maps.len()
    }

    /// Local values from a global vector (transpose of the assembly map).
    pub fn gather(&self, s: usize, global: &DVector<f64>) -> DVector<f64> {
        let map = &self.assembly_maps[s];
        DVector::from_iterator(map.len(), map.iter().map(|&g| global[g]))
    }

    /// Adds local values into a global vector.
    pub fn scatter_add(&self, s: usize, local: &DVector<f64>, out: &mut DVector<f64>) {
        for (k, &g) in self.assembly_maps[s].iter().enumerate() {
            out[g] += local[k];
        }
    }
}

/// Per-patch references: the subdomain index plus its refined-side handle.
#[derive(Debug)]
struct Patch {
    subdomain: usize,
    fine: SchurHandle,
}

/// Reference solution: interface trace plus recovered per-patch fields.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub trace: DVector<f64>,
    /// Full displacement field of each patch's fine model, patch order.
    pub fine_fields: Vec<DVector<f64>>,
    /// Fine interface trace per patch.
    pub fine_traces: Vec<DVector<f64>>,
}

/// The assembled coupled problem: condensed coarse subdomains for every
/// region, condensed fine models for the patches, and the factored global
/// interface operator.
#[derive(Debug)]
pub struct CouplingProblem {
    space: InterfaceSpace,
    coarse: Vec<SchurHandle>,
    patches: Vec<Patch>,
    global_factor: Cholesky<f64, Dyn>,
    global_rhs: DVector<f64>,
    reference_rhs: DVector<f64>,
    fingerprint: u64,
    reference: OnceLock<ReferenceSolution>,
}

impl CouplingProblem {
    /// Assembles and factors the global condensed operator. `fine[s]` must be
    /// `Some` exactly where `space.interpolators[s]` is.
    pub fn new(
        space: InterfaceSpace,
        coarse: Vec<SchurHandle>,
        fine: Vec<Option<SchurHandle>>,
    ) -> Result<Self> {
        if coarse.len() != space.n_subdomains() || fine.len() != space.n_subdomains() {
            return Err(Error::DimensionMismatch(
                "one coarse handle and one fine slot per subdomain required".into(),
            ));
        }
        for (s, handle) in coarse.iter().enumerate() {
            if handle.n_boundary() != space.assembly_maps[s].len() {
                return Err(Error::DimensionMismatch(format!(
                    "subdomain {s}: coarse interface has {} DOFs but the assembly map has {}",
                    handle.n_boundary(),
                    space.assembly_maps[s].len()
                )));
            }
        }

        let mut patches = Vec::new();
        for (s, slot) in fine.into_iter().enumerate() {
            match (slot, &space.interpolators[s]) {
                (Some(fine_handle), Some(interp)) => {
                    if interp.nrows() != fine_handle.n_boundary()
                        || interp.ncols() != coarse[s].n_boundary()
                    {
                        return Err(Error::DimensionMismatch(format!(
                            "patch {s}: interpolator is {}x{} but fine/coarse interfaces are {}/{}",
                            interp.nrows(),
                            interp.ncols(),
                            fine_handle.n_boundary(),
                            coarse[s].n_boundary()
                        )));
                    }
                    patches.push(Patch {
                        subdomain: s,
                        fine: fine_handle,
                    });
                }
                (None, None) => {}
                _ => {
                    return Err(Error::DimensionMismatch(format!(
                        "subdomain {s}: fine handle and interpolator must be paired"
                    )));
                }
            }
        }

        // Assembled coarse interface operator and right-hand side.
        let n = space.n_global;
        let mut s_global = DMatrix::zeros(n, n);
        let mut global_rhs = DVector::zeros(n);
        for (s, handle) in coarse.iter().enumerate() {
            let (s_dense, b) = handle.materialize_dense()?;
            let map = &space.assembly_maps[s];
            for (j, &gj) in map.iter().enumerate() {
                global_rhs[gj] += b[j];
                for (i, &gi) in map.iter().enumerate() {
                    s_global[(gi, gj)] += s_dense[(i, j)];
                }
            }
        }

        // Assembled reference right-hand side.
        let mut reference_rhs = DVector::zeros(n);
        for (s, handle) in coarse.iter().enumerate() {
            if space.interpolators[s].is_none() {
                space.scatter_add(s, handle.condensed_rhs(), &mut reference_rhs);
            }
        }
        for patch in &patches {
            let s = patch.subdomain;
            let interp = space.interpolators[s].as_ref().expect("patch interpolator");
            let pulled = interp.apply_transpose(patch.fine.condensed_rhs());
            space.scatter_add(s, &pulled, &mut reference_rhs);
        }

        let fingerprint = fingerprint(&s_global, &global_rhs, &reference_rhs);
        let global_factor = Cholesky::new(s_global).ok_or(Error::SingularGlobal)?;

        Ok(CouplingProblem {
            space,
            coarse,
            patches,
            global_factor,
            global_rhs,
            reference_rhs,
            fingerprint,
            reference: OnceLock::new(),
        })
    }

    pub fn space(&self) -> &InterfaceSpace {
        &self.space
    }

    pub fn n_global(&self) -> usize {
        self.space.n_global
    }

    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn has_complementary(&self) -> bool {
        self.space.has_complementary
    }

    pub fn coarse_handle(&self, s: usize) -> &SchurHandle {
        &self.coarse[s]
    }

    pub fn fine_handle(&self, patch: usize) -> &SchurHandle {
        &self.patches[patch].fine
    }

    pub fn patch_subdomain(&self, patch: usize) -> usize {
        self.patches[patch].subdomain
    }

    pub fn global_rhs(&self) -> &DVector<f64> {
        &self.global_rhs
    }

    pub fn reference_rhs(&self) -> &DVector<f64> {
        &self.reference_rhs
    }

    /// Total DOF count over all coarse and fine models (oracle gating).
    pub fn total_dofs(&self) -> usize {
        self.coarse.iter().map(|h| h.model().n_dofs()).sum::<usize>()
            + self.patches.iter().map(|p| p.fine.model().n_dofs()).sum::<usize>()
    }

    /// Hash of the assembled operators, for run provenance.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Solves the assembled coarse problem under the interface load `p` and,
    /// when a complementary zone exists, returns its assembled reaction.
    pub fn global_solve(
        &self,
        p: &DVector<f64>,
    ) -> Result<(DVector<f64>, Option<DVector<f64>>)> {
        if p.len() != self.n_global() {
            return Err(Error::DimensionMismatch(format!(
                "interface load length {} does not match global size {}",
                p.len(),
                self.n_global()
            )));
        }
        let u = self.global_factor.solve(&(&self.global_rhs + p));
        let q0 = self.complementary_reaction(&u)?;
        Ok((u, q0))
    }

    fn complementary_reaction(&self, u: &DVector<f64>) -> Result<Option<DVector<f64>>> {
        if !self.space.has_complementary {
            return Ok(None);
        }
        let mut q0 = DVector::zeros(self.n_global());
        for (s, handle) in self.coarse.iter().enumerate() {
            if self.space.interpolators[s].is_none() {
                let lambda = handle.reaction(&self.space.gather(s, u))?;
                self.space.scatter_add(s, &lambda, &mut q0);
            }
        }
        Ok(Some(q0))
    }

    /// Fine interface trace of patch `patch` for the global trace `u`.
    pub fn patch_fine_trace(&self, patch: usize, u: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.patch_checked(patch)?;
        let interp = self.space.interpolators[p.subdomain]
            .as_ref()
            .expect("patch interpolator");
        Ok(interp.apply(&self.space.gather(p.subdomain, u)))
    }

    /// Dirichlet fine solve of one patch under the interpolated global trace;
    /// returns the fine interface reaction.
    pub fn fine_local_solve(&self, patch: usize, u: &DVector<f64>) -> Result<DVector<f64>> {
        let trace = self.patch_fine_trace(patch, u)?;
        self.patch_checked(patch)?.fine.reaction(&trace)
    }

    /// One patch update from its local coarse trace: fine solve plus reaction
    /// transfer back to the coarse interface of that subdomain. This is the
    /// unit of work a worker performs.
    pub fn patch_contribution(
        &self,
        patch: usize,
        coarse_trace: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let p = self.patch_checked(patch)?;
        let interp = self.space.interpolators[p.subdomain]
            .as_ref()
            .expect("patch interpolator");
        let lambda = p.fine.reaction(&interp.apply(coarse_trace))?;
        Ok(interp.apply_transpose(&lambda))
    }

    /// Local coarse trace of a patch's subdomain.
    pub fn patch_coarse_trace(&self, patch: usize, u: &DVector<f64>) -> Result<DVector<f64>> {
        let p = self.patch_checked(patch)?;
        Ok(self.space.gather(p.subdomain, u))
    }

    /// Reaction imbalance across subdomains for fine reactions `lambdas`
    /// (patch order) and the assembled complementary reaction.
    pub fn assemble_residual(
        &self,
        complementary: Option<&DVector<f64>>,
        lambdas: &[DVector<f64>],
    ) -> Result<DVector<f64>> {
        if complementary.is_some() != self.space.has_complementary {
            return Err(Error::DimensionMismatch(
                "complementary reaction must be supplied exactly when a complementary zone exists"
                    .into(),
            ));
        }
        if lambdas.len() != self.patches.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} fine reactions supplied but there are {} patches",
                lambdas.len(),
                self.patches.len()
            )));
        }
        let mut contributions = Vec::with_capacity(self.patches.len());
        for (patch, lambda) in self.patches.iter().zip(lambdas) {
            if lambda.len() != patch.fine.n_boundary() {
                return Err(Error::DimensionMismatch(format!(
                    "patch {}: fine reaction length {} does not match interface size {}",
                    patch.subdomain,
                    lambda.len(),
                    patch.fine.n_boundary()
                )));
            }
            let interp = self.space.interpolators[patch.subdomain]
                .as_ref()
                .expect("patch interpolator");
            contributions.push(interp.apply_transpose(lambda));
        }
        Ok(self.residual_from_contributions(complementary, &contributions))
    }

    /// Residual from per-patch coarse-side contributions (already transferred
    /// through the interpolator transpose). Shared by every engine so the
    /// floating-point evaluation order is identical everywhere.
    pub fn residual_from_contributions(
        &self,
        complementary: Option<&DVector<f64>>,
        contributions: &[DVector<f64>],
    ) -> DVector<f64> {
        let mut r = DVector::zeros(self.n_global());
        for (patch, q) in self.patches.iter().zip(contributions) {
            self.space.scatter_add(patch.subdomain, q, &mut r);
        }
        if let Some(q0) = complementary {
            r += q0;
        }
        -r
    }

    /// Dense assembled coarse interface operator (test oracle).
    pub fn materialize_global_operator(&self) -> Result<DMatrix<f64>> {
        let n = self.n_global();
        let mut s_global = DMatrix::zeros(n, n);
        for (s, handle) in self.coarse.iter().enumerate() {
            let (s_dense, _) = handle.materialize_dense()?;
            let map = &self.space.assembly_maps[s];
            for (j, &gj) in map.iter().enumerate() {
                for (i, &gi) in map.iter().enumerate() {
                    s_global[(gi, gj)] += s_dense[(i, j)];
                }
            }
        }
        Ok(s_global)
    }

    /// Dense assembled reference interface operator (oracle and tests).
    pub fn materialize_reference_operator(&self) -> Result<DMatrix<f64>> {
        let n = self.n_global();
        let mut s_ref = DMatrix::zeros(n, n);
        for (s, handle) in self.coarse.iter().enumerate() {
            if self.space.interpolators[s].is_none() {
                let (s_dense, _) = handle.materialize_dense()?;
                let map = &self.space.assembly_maps[s];
                for (j, &gj) in map.iter().enumerate() {
                    for (i, &gi) in map.iter().enumerate() {
                        s_ref[(gi, gj)] += s_dense[(i, j)];
                    }
                }
            }
        }
        for patch in &self.patches {
            let s = patch.subdomain;
            let interp = self.space.interpolators[s].as_ref().expect("patch interpolator");
            let map = &self.space.assembly_maps[s];
            let nc = interp.ncols();
            // Columns of J' S_fine J, one fine application per coarse DOF.
            let mut unit = DVector::zeros(nc);
            for j in 0..nc {
                unit[j] = 1.0;
                let fine_col = patch.fine.apply_condensed(&interp.apply(&unit))?;
                let col = interp.apply_transpose(&fine_col);
                unit[j] = 0.0;
                let gj = map[j];
                for (i, &gi) in map.iter().enumerate() {
                    s_ref[(gi, gj)] += col[i];
                }
            }
        }
        Ok(s_ref)
    }

    /// Solves the assembled reference problem, the oracle every engine is
    /// checked against. The result is computed once and cached.
    pub fn reference_solve(&self) -> Result<&ReferenceSolution> {
        if self.reference.get().is_none() {
            let solution = self.compute_reference()?;
            let _ = self.reference.set(solution);
        }
        Ok(self.reference.get().expect("reference just computed"))
    }

    fn compute_reference(&self) -> Result<ReferenceSolution> {
        let s_ref = self.materialize_reference_operator()?;
        let factor = Cholesky::new(s_ref).ok_or(Error::SingularReference)?;
        let trace = factor.solve(&self.reference_rhs);

        let mut fine_traces = Vec::with_capacity(self.patches.len());
        let mut fine_fields = Vec::with_capacity(self.patches.len());
        for (k, patch) in self.patches.iter().enumerate() {
            let t = self.patch_fine_trace(k, &trace)?;
            fine_fields.push(patch.fine.interior_recovery(&t)?);
            fine_traces.push(t);
        }
        Ok(ReferenceSolution {
            trace,
            fine_fields,
            fine_traces,
        })
    }

    fn patch_checked(&self, patch: usize) -> Result<&Patch> {
        self.patches.get(patch).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "patch index {patch} out of range ({} patches)",
                self.patches.len()
            ))
        })
    }
}

/// FNV-1a over the assembled operators' raw bytes.
fn fingerprint(s_global: &DMatrix<f64>, bg: &DVector<f64>, br: &DVector<f64>) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64;
    let mut eat = |x: f64| {
        for byte in x.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    s_global.iter().for_each(|&v| eat(v));
    bg.iter().for_each(|&v| eat(v));
    br.iter().for_each(|&v| eat(v));
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::SubdomainModel;
    use crate::schur::condense;
    use crate::sparse;
    use nalgebra::DMatrix;
    use rand::{rngs::SmallRng, Rng, SeedableRng};

    fn handle_from_dense(
        name: &str,
        k: DMatrix<f64>,
        f: DVector<f64>,
        boundary: Vec<usize>,
    ) -> SchurHandle {
        let model = SubdomainModel::from_matrix(name, sparse::from_dense(&k), f, boundary).unwrap();
        condense(model).unwrap()
    }

    /// Two 1D bar subdomains sharing their interface with distinct fine
    /// versions; subdomain 0 is complementary (coarse only).
    fn two_bar_problem() -> CouplingProblem {
        // Subdomain 0 (complementary): DOFs [interior, shared], K tridiagonal.
        let k0 = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let f0 = DVector::from_vec(vec![1.0, 0.0]);
        let coarse0 = handle_from_dense("bar0", k0, f0, vec![1]);

        // Subdomain 1: coarse version.
        let k1 = DMatrix::from_row_slice(2, 2, &[3.0, -1.5, -1.5, 3.0]);
        let f1 = DVector::from_vec(vec![0.5, 0.0]);
        let coarse1 = handle_from_dense("bar1-coarse", k1, f1, vec![1]);

        // Subdomain 1: fine version, three DOFs, same interface DOF count.
        let k1f = DMatrix::from_row_slice(
            3,
            3,
            &[4.0, -2.0, 0.0, -2.0, 4.0, -2.0, 0.0, -2.0, 4.0],
        );
        let f1f = DVector::from_vec(vec![0.25, 0.25, 0.0]);
        let fine1 = handle_from_dense("bar1-fine", k1f, f1f, vec![2]);

        let space = InterfaceSpace::new(
            1,
            vec![vec![0], vec![0]],
            vec![None, Some(SparseInterp::identity(1))],
        )
        .unwrap();
        CouplingProblem::new(space, vec![coarse0, coarse1], vec![None, Some(fine1)]).unwrap()
    }

    #[test]
    fn zero_load_zero_trace_gives_zero_residual() {
        let problem = two_bar_problem();
        let zero = DVector::zeros(1);
        let lambdas = vec![DVector::zeros(1)];
        let r = problem
            .assemble_residual(Some(&zero), &lambdas)
            .unwrap();
        assert_eq!(r[0], 0.0);
    }

    #[test]
    fn manufactured_interface_load_recovers_trace() {
        let problem = two_bar_problem();
        let s_global = problem.materialize_global_operator().unwrap();
        let u_star = DVector::from_vec(vec![0.37]);
        let p_star = &s_global * &u_star - problem.global_rhs();
        let (u, q0) = problem.global_solve(&p_star).unwrap();
        assert!((u - &u_star).norm() <= 1e-10 * u_star.norm());
        assert!(q0.is_some());
    }

    #[test]
    fn global_solve_is_affine_linear() {
        let problem = two_bar_problem();
        let p1 = DVector::from_vec(vec![0.8]);
        let p2 = DVector::from_vec(vec![-0.3]);
        let (u12, _) = problem.global_solve(&(&p1 + &p2)).unwrap();
        let (u1, _) = problem.global_solve(&p1).unwrap();
        let (u2, _) = problem.global_solve(&p2).unwrap();
        let (u0, _) = problem.global_solve(&DVector::zeros(1)).unwrap();
        let expect = &u1 + &u2 - &u0;
        assert!((u12 - &expect).norm() <= 1e-10 * expect.norm().max(1.0));
    }

    #[test]
    fn residual_matches_dense_fixed_point_oracle() {
        // Dense evaluation of the interface fixed-point residual:
        // r = -(p - (S_g - S_r) S_g^{-1} p - (b_r - S_r S_g^{-1} b_g)).
        let problem = two_bar_problem();
        let s_g = problem.materialize_global_operator().unwrap();
        let s_r = problem.materialize_reference_operator().unwrap();
        let b_g = problem.global_rhs().clone();
        let b_r = problem.reference_rhs().clone();
        let s_g_inv = s_g.clone().try_inverse().unwrap();

        let mut rng = SmallRng::seed_from_u64(5);
        for _ in 0..5 {
            let p = DVector::from_fn(1, |_, _| rng.gen_range(-2.0..2.0));
            let expected = -(&p
                - (&s_g - &s_r) * &s_g_inv * &p
                - (&b_r - &s_r * &s_g_inv * &b_g));

            let (u, q0) = problem.global_solve(&p).unwrap();
            let lambdas: Vec<DVector<f64>> = (0..problem.n_patches())
                .map(|k| problem.fine_local_solve(k, &u).unwrap())
                .collect();
            let r = problem.assemble_residual(q0.as_ref(), &lambdas).unwrap();
            assert!((r - &expected).norm() <= 1e-10 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn reference_trace_is_a_fixed_point() {
        let problem = two_bar_problem();
        let reference = problem.reference_solve().unwrap().clone();

        // Interface load that reproduces the reference trace on the coarse model.
        let s_g = problem.materialize_global_operator().unwrap();
        let p_star = &s_g * &reference.trace - problem.global_rhs();
        let (u, q0) = problem.global_solve(&p_star).unwrap();
        assert!((&u - &reference.trace).norm() <= 1e-9 * reference.trace.norm());

        let lambdas: Vec<DVector<f64>> = (0..problem.n_patches())
            .map(|k| problem.fine_local_solve(k, &u).unwrap())
            .collect();
        let r = problem.assemble_residual(q0.as_ref(), &lambdas).unwrap();
        assert!(r.norm() <= 1e-9 * problem.reference_rhs().norm());
    }

    #[test]
    fn identical_models_make_reference_equal_global() {
        // One subdomain covering everything, fine == coarse.
        let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let coarse = handle_from_dense("c", k.clone(), f.clone(), vec![1]);
        let fine = handle_from_dense("f", k, f, vec![1]);
        let space =
            InterfaceSpace::new(1, vec![vec![0]], vec![Some(SparseInterp::identity(1))]).unwrap();
        let problem = CouplingProblem::new(space, vec![coarse], vec![Some(fine)]).unwrap();

        let (u0, q0) = problem.global_solve(&DVector::zeros(1)).unwrap();
        assert!(q0.is_none());
        let reference = problem.reference_solve().unwrap();
        assert!((&reference.trace - &u0).norm() <= 1e-12 * u0.norm());

        // First-iteration residual vanishes.
        let lambdas = vec![problem.fine_local_solve(0, &u0).unwrap()];
        let r = problem.assemble_residual(None, &lambdas).unwrap();
        assert!(r.norm() <= 1e-12 * problem.reference_rhs().norm());
    }

    #[test]
    fn coverage_validation_rejects_orphan_dofs() {
        let err = InterfaceSpace::new(
            2,
            vec![vec![0], vec![0]],
            vec![None, Some(SparseInterp::identity(1))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("touched by"));
    }

    #[test]
    fn assembly_adjointness_is_exact() {
        let space = InterfaceSpace::new(
            3,
            vec![vec![0, 2], vec![1, 2]],
            vec![Some(SparseInterp::identity(2)), Some(SparseInterp::identity(2))],
        )
        .unwrap();
        let mut rng = SmallRng::seed_from_u64(9);
        for s in 0..2 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            let y = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let mut ay = DVector::zeros(3);
            space.scatter_add(s, &y, &mut ay);
            let lhs = ay.dot(&x);
            let rhs = y.dot(&space.gather(s, &x));
            assert_eq!(lhs, rhs);
        }
    }
}
