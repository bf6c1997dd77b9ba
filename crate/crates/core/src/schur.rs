//! Per-subdomain static condensation.
//!
//! A [`SchurHandle`] caches one factorization of the interior stiffness block
//! and exposes interface-level applications: nodal reactions for a given
//! interface displacement and recovery of the interior field. The production
//! path never materializes the condensed operator; a dense copy is available
//! for small problems as a test oracle and for assembling the global
//! interface systems.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::CscMatrix;

use crate::error::{Error, Result};
use crate::fem::SubdomainModel;
use crate::sparse;

/// Largest interface size for which a dense condensed operator may be built.
pub const DENSE_LIMIT: usize = 3000;

/// Cached interior factorization of one subdomain, exposing condensed
/// interface operations.
#[derive(Debug)]
pub struct SchurHandle {
    model: SubdomainModel,
    /// Factorization of the interior block; `None` when the subdomain has no
    /// interior DOFs (the condensed operator is then the boundary block).
    interior_factor: Option<CscCholesky<f64>>,
    k_ib: CscMatrix<f64>,
    k_bi: CscMatrix<f64>,
    k_bb: CscMatrix<f64>,
    /// Interior solution under the external load alone.
    interior_load_solution: DVector<f64>,
    condensed_rhs: DVector<f64>,
    factorizations: u64,
}

/// Eliminates the interior DOFs of `model`, factoring the interior block
/// exactly once.
pub fn condense(model: SubdomainModel) -> Result<SchurHandle> {
    if model.boundary.is_empty() {
        return Err(Error::InvalidLayout(format!(
            "subdomain `{}`: condensation requires a non-empty interface set",
            model.name
        )));
    }

    let k_ii = sparse::extract_block(&model.stiffness, &model.interior, &model.interior);
    let k_ib = sparse::extract_block(&model.stiffness, &model.interior, &model.boundary);
    let k_bi = sparse::extract_block(&model.stiffness, &model.boundary, &model.interior);
    let k_bb = sparse::extract_block(&model.stiffness, &model.boundary, &model.boundary);
    let f_i = gather(&model.load, &model.interior);
    let f_b = gather(&model.load, &model.boundary);

    let (interior_factor, factorizations) = if model.interior.is_empty() {
        (None, 0)
    } else {
        let chol = CscCholesky::factor(&k_ii).map_err(|_| Error::SingularInterior {
            name: model.name.clone(),
        })?;
        (Some(chol), 1)
    };

    let interior_load_solution = match &interior_factor {
        Some(chol) => sparse::chol_solve(chol, &f_i),
        None => DVector::zeros(0),
    };
    let condensed_rhs = &f_b - sparse::spmv(&k_bi, &interior_load_solution);

    Ok(SchurHandle {
        model,
        interior_factor,
        k_ib,
        k_bi,
        k_bb,
        interior_load_solution,
        condensed_rhs,
        factorizations,
    })
}

impl SchurHandle {
    pub fn model(&self) -> &SubdomainModel {
        &self.model
    }

    pub fn n_boundary(&self) -> usize {
        self.model.boundary.len()
    }

    /// Condensed right-hand side on the interface.
    pub fn condensed_rhs(&self) -> &DVector<f64> {
        &self.condensed_rhs
    }

    /// Number of interior factorizations performed (at most one).
    pub fn factorization_count(&self) -> u64 {
        self.factorizations
    }

    /// Nodal interface reaction for the interface displacement `u_b`,
    /// computed through one interior solve.
    pub fn reaction(&self, u_b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(u_b)?;
        let mut lambda = sparse::spmv(&self.k_bb, u_b);
        if let Some(chol) = &self.interior_factor {
            let t = sparse::chol_solve(chol, &sparse::spmv(&self.k_ib, u_b));
            lambda -= sparse::spmv(&self.k_bi, &t);
        }
        lambda -= &self.condensed_rhs;
        Ok(lambda)
    }

    /// Condensed operator application without the load offset.
    pub fn apply_condensed(&self, u_b: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.reaction(u_b)? + &self.condensed_rhs)
    }

    /// Full-length displacement: interior response to `u_b` and the load,
    /// interface values in place, zeros on the Dirichlet set.
    pub fn interior_recovery(&self, u_b: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(u_b)?;
        let mut full = DVector::zeros(self.model.n_dofs());
        if let Some(chol) = &self.interior_factor {
            let coupling = sparse::chol_solve(chol, &sparse::spmv(&self.k_ib, u_b));
            for (k, &dof) in self.model.interior.iter().enumerate() {
                full[dof] = self.interior_load_solution[k] - coupling[k];
            }
        }
        for (k, &dof) in self.model.boundary.iter().enumerate() {
            full[dof] = u_b[k];
        }
        Ok(full)
    }

    /// Dense condensed operator and right-hand side; test oracle and global
    /// assembly helper, gated to small interfaces.
    pub fn materialize_dense(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let nb = self.n_boundary();
        if nb > DENSE_LIMIT {
            return Err(Error::InvalidSetting(format!(
                "subdomain `{}`: dense condensed operator gated to {DENSE_LIMIT} interface DOFs, got {nb}",
                self.model.name
            )));
        }
        let mut s = DMatrix::zeros(nb, nb);
        let mut unit = DVector::zeros(nb);
        for k in 0..nb {
            unit[k] = 1.0;
            let col = self.apply_condensed(&unit)?;
            s.column_mut(k).copy_from(&col);
            unit[k] = 0.0;
        }
        Ok((s, self.condensed_rhs.clone()))
    }

    fn check_len(&self, u_b: &DVector<f64>) -> Result<()> {
        if u_b.len() != self.n_boundary() {
            return Err(Error::DimensionMismatch(format!(
                "subdomain `{}`: interface vector length {} does not match {} interface DOFs",
                self.model.name,
                u_b.len(),
                self.n_boundary()
            )));
        }
        Ok(())
    }
}

fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&d| v[d]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble, SubdomainModel};
    use crate::mesh::{build_cube_mesh, extract_interface, homogeneous_material, Face};
    use nalgebra::DMatrix;
    use rand::{rngs::SmallRng, Rng, SeedableRng};

    fn toy_handle() -> SchurHandle {
        // K = [[2, -1], [-1, 2]], interior {0}, boundary {1}, f = 0.
        let k = sparse::from_dense(&DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]));
        let model =
            SubdomainModel::from_matrix("toy", k, DVector::zeros(2), vec![1]).unwrap();
        condense(model).unwrap()
    }

    #[test]
    fn toy_matrix_condenses_by_hand() {
        let handle = toy_handle();
        let (s, b) = handle.materialize_dense().unwrap();
        // Dense elimination oracle: S = 2 - (-1)(1/2)(-1) = 1.5, b = 0.
        assert!((s[(0, 0)] - 1.5).abs() <= 1e-15);
        assert_eq!(b[0], 0.0);
    }

    #[test]
    fn toy_reaction_and_recovery() {
        let handle = toy_handle();
        let lambda = handle.reaction(&DVector::from_vec(vec![2.0])).unwrap();
        assert!((lambda[0] - 3.0).abs() <= 1e-15);
        let full = handle.interior_recovery(&DVector::from_vec(vec![2.0])).unwrap();
        // u_i = (1/2)(0 - (-1)*2) = 1.
        assert!((full[0] - 1.0).abs() <= 1e-15);
        assert_eq!(full[1], 2.0);
    }

    #[test]
    fn zero_load_gives_zero_condensed_rhs() {
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 3.0, 0.3).unwrap();
        let sel = extract_interface(&mesh, &Face::ALL).unwrap();
        let model = assemble(mesh, &mat, [0.0; 3], "m")
            .unwrap()
            .with_interface(&sel.dofs)
            .unwrap();
        let handle = condense(model).unwrap();
        assert!(handle.condensed_rhs().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn reaction_at_zero_trace_is_minus_rhs() {
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 3.0, 0.3).unwrap();
        let sel = extract_interface(&mesh, &Face::ALL).unwrap();
        let model = assemble(mesh, &mat, [1.0, -2.0, 0.5], "m")
            .unwrap()
            .with_interface(&sel.dofs)
            .unwrap();
        let handle = condense(model).unwrap();
        let lambda = handle.reaction(&DVector::zeros(handle.n_boundary())).unwrap();
        let expect = -handle.condensed_rhs();
        assert!((lambda - expect).norm() <= 1e-14 * handle.condensed_rhs().norm().max(1.0));
    }

    #[test]
    fn rigid_translation_produces_no_reaction() {
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 10.0, 0.3).unwrap();
        let sel = extract_interface(&mesh, &Face::ALL).unwrap();
        let model = assemble(mesh, &mat, [0.0; 3], "m")
            .unwrap()
            .with_interface(&sel.dofs)
            .unwrap();
        let handle = condense(model).unwrap();
        let nb = handle.n_boundary();
        let mut u = DVector::zeros(nb);
        for k in 0..nb / 3 {
            u[3 * k] = 1.0; // unit x-translation of the whole interface
        }
        let lambda = handle.reaction(&u).unwrap();
        let (s, _) = handle.materialize_dense().unwrap();
        assert!(lambda.norm() <= 1e-9 * s.norm());
    }

    fn random_spd_model(rng: &mut SmallRng, n: usize, nb: usize) -> SubdomainModel {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let spd = &raw * raw.transpose() + DMatrix::identity(n, n) * n as f64;
        let f = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let boundary: Vec<usize> = (n - nb..n).collect();
        SubdomainModel::from_matrix("random", sparse::from_dense(&spd), f, boundary).unwrap()
    }

    #[test]
    fn dense_oracle_matches_block_elimination() {
        let mut rng = SmallRng::seed_from_u64(11);
        for trial in 0..5 {
            let n = 20 + 10 * trial;
            let nb = 4 + trial;
            let model = random_spd_model(&mut rng, n, nb);
            let kd = sparse::to_dense(&model.stiffness);
            let ni = n - nb;
            let k_ii = kd.view((0, 0), (ni, ni)).into_owned();
            let k_ib = kd.view((0, ni), (ni, nb)).into_owned();
            let k_bi = kd.view((ni, 0), (nb, ni)).into_owned();
            let k_bb = kd.view((ni, ni), (nb, nb)).into_owned();
            let inv = k_ii.try_inverse().unwrap();
            let s_oracle = &k_bb - &k_bi * &inv * &k_ib;
            let f_i = model.load.rows(0, ni).into_owned();
            let f_b = model.load.rows(ni, nb).into_owned();
            let b_oracle = &f_b - &k_bi * &inv * &f_i;

            let handle = condense(model).unwrap();
            let (s, b) = handle.materialize_dense().unwrap();
            assert!((&s - &s_oracle).norm() <= 1e-10 * s_oracle.norm());
            assert!((&b - &b_oracle).norm() <= 1e-10 * b_oracle.norm().max(1.0));

            // Symmetric positive (semi-)definite check on the dense copy.
            let eigs = s.clone().symmetric_eigen().eigenvalues;
            assert!(eigs.iter().all(|&l| l > -1e-10 * s.norm()));

            // reaction() against the oracle for random traces.
            for _ in 0..20 {
                let u = DVector::from_fn(nb, |_, _| rng.gen_range(-1.0..1.0));
                let expect = &s_oracle * &u - &b_oracle;
                let got = handle.reaction(&u).unwrap();
                assert!((got - &expect).norm() <= 1e-10 * expect.norm().max(1.0));
            }
        }
    }

    #[test]
    fn reaction_is_affine_linear() {
        let mut rng = SmallRng::seed_from_u64(3);
        let model = random_spd_model(&mut rng, 30, 6);
        let handle = condense(model).unwrap();
        let u = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
        let v = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
        let (alpha, beta) = (0.7, -1.3);
        let lhs = handle.apply_condensed(&(&u * alpha + &v * beta)).unwrap();
        let rhs = handle.apply_condensed(&u).unwrap() * alpha + handle.apply_condensed(&v).unwrap() * beta;
        assert!((lhs - &rhs).norm() <= 1e-10 * rhs.norm().max(1.0));
    }

    #[test]
    fn equilibrium_holds_after_recovery() {
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 7.0, 0.3).unwrap();
        let sel = extract_interface(&mesh, &Face::ALL).unwrap();
        let model = assemble(mesh, &mat, [1.0, 2.0, -0.5], "m")
            .unwrap()
            .with_interface(&sel.dofs)
            .unwrap();
        let k = model.stiffness.clone();
        let f = model.load.clone();
        let boundary = model.boundary.clone();
        let handle = condense(model).unwrap();

        let mut rng = SmallRng::seed_from_u64(21);
        for _ in 0..10 {
            let u_b = DVector::from_fn(handle.n_boundary(), |_, _| rng.gen_range(-1.0..1.0));
            let full = handle.interior_recovery(&u_b).unwrap();
            let lambda = handle.reaction(&u_b).unwrap();
            // K u - f - T' lambda must vanish.
            let mut residual = sparse::spmv(&k, &full) - &f;
            for (k_idx, &dof) in boundary.iter().enumerate() {
                residual[dof] -= lambda[k_idx];
            }
            assert!(residual.norm() <= 1e-9 * f.norm());
        }
    }

    #[test]
    fn factorization_happens_once() {
        let handle = toy_handle();
        for _ in 0..50 {
            handle.reaction(&DVector::from_vec(vec![1.0])).unwrap();
        }
        assert_eq!(handle.factorization_count(), 1);
    }

    #[test]
    fn singular_interior_names_the_subdomain() {
        // Interior DOF fully decoupled: K_ii = 0.
        let k = sparse::from_dense(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        let model =
            SubdomainModel::from_matrix("floating-part", k, DVector::zeros(2), vec![1]).unwrap();
        let err = condense(model).unwrap_err();
        assert!(err.to_string().contains("floating-part"));
    }

    #[test]
    fn empty_interface_is_rejected() {
        let k = sparse::from_dense(&DMatrix::from_row_slice(1, 1, &[1.0]));
        let model = SubdomainModel::from_matrix("m", k, DVector::zeros(1), vec![]).unwrap();
        assert!(condense(model).is_err());
    }
}
