//! Trilinear hexahedral finite elements for isotropic linear elasticity:
//! element stiffness, sparse assembly, consistent body load, and Dirichlet
//! handling by symmetric reduction.

use nalgebra::{DVector, Matrix3, SMatrix};
use nalgebra_sparse::{CooMatrix, CscMatrix};

use crate::error::{Error, Result};
use crate::mesh::{MaterialField, StructuredMesh};
use crate::sparse;

/// Natural coordinates of the eight corners.
const XI: [f64; 8] = [-1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0];
const ETA: [f64; 8] = [-1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0];
const ZETA: [f64; 8] = [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0];

fn shape_functions(xi: f64, eta: f64, zeta: f64) -> [f64; 8] {
    let mut n = [0.0; 8];
    for a in 0..8 {
        n[a] = 0.125 * (1.0 + XI[a] * xi) * (1.0 + ETA[a] * eta) * (1.0 + ZETA[a] * zeta);
    }
    n
}

fn shape_derivatives(xi: f64, eta: f64, zeta: f64) -> [[f64; 8]; 3] {
    let mut d = [[0.0; 8]; 3];
    for a in 0..8 {
        d[0][a] = 0.125 * XI[a] * (1.0 + ETA[a] * eta) * (1.0 + ZETA[a] * zeta);
        d[1][a] = 0.125 * (1.0 + XI[a] * xi) * ETA[a] * (1.0 + ZETA[a] * zeta);
        d[2][a] = 0.125 * (1.0 + XI[a] * xi) * (1.0 + ETA[a] * eta) * ZETA[a];
    }
    d
}

fn jacobian(coords: &[[f64; 3]; 8], d: &[[f64; 8]; 3]) -> Matrix3<f64> {
    let mut jac = Matrix3::zeros();
    for a in 0..8 {
        for r in 0..3 {
            for c in 0..3 {
                jac[(r, c)] += d[r][a] * coords[a][c];
            }
        }
    }
    jac
}

/// Isotropic Hooke matrix in Voigt order (xx, yy, zz, xy, yz, xz),
/// engineering shear strains.
fn hooke(e: f64, nu: f64) -> SMatrix<f64, 6, 6> {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let mut d = SMatrix::<f64, 6, 6>::zeros();
    for r in 0..3 {
        for c in 0..3 {
            d[(r, c)] = lambda;
        }
        d[(r, r)] = lambda + 2.0 * mu;
        d[(r + 3, r + 3)] = mu;
    }
    d
}

const GAUSS: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

fn for_each_gauss_point(mut f: impl FnMut(usize, f64, f64, f64)) {
    let mut gp = 0;
    for &zeta in &[-GAUSS, GAUSS] {
        for &eta in &[-GAUSS, GAUSS] {
            for &xi in &[-GAUSS, GAUSS] {
                f(gp, xi, eta, zeta);
                gp += 1;
            }
        }
    }
}

/// Element stiffness by 2x2x2 Gauss quadrature of B' D B.
pub fn element_stiffness(
    coords: &[[f64; 3]; 8],
    e: f64,
    nu: f64,
) -> Result<SMatrix<f64, 24, 24>> {
    if !(e > 0.0) {
        return Err(Error::InvalidMaterial(format!(
            "Young modulus must be positive, got {e}"
        )));
    }
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::InvalidMaterial(format!(
            "nu must lie in [0, 0.5), got {nu}"
        )));
    }

    let d_mat = hooke(e, nu);
    let mut k = SMatrix::<f64, 24, 24>::zeros();
    let mut bad: Option<Error> = None;

    for_each_gauss_point(|gp, xi, eta, zeta| {
        if bad.is_some() {
            return;
        }
        let d = shape_derivatives(xi, eta, zeta);
        let jac = jacobian(coords, &d);
        let det = jac.determinant();
        if det <= 0.0 {
            bad = Some(Error::DegenerateElement { det, point: gp });
            return;
        }
        let inv = jac.try_inverse().expect("positive determinant");

        // Physical gradients of the shape functions.
        let mut grad = [[0.0_f64; 8]; 3];
        for a in 0..8 {
            for r in 0..3 {
                grad[r][a] = inv[(r, 0)] * d[0][a] + inv[(r, 1)] * d[1][a] + inv[(r, 2)] * d[2][a];
            }
        }

        let mut b = SMatrix::<f64, 6, 24>::zeros();
        for a in 0..8 {
            let col = 3 * a;
            b[(0, col)] = grad[0][a];
            b[(1, col + 1)] = grad[1][a];
            b[(2, col + 2)] = grad[2][a];
            b[(3, col)] = grad[1][a];
            b[(3, col + 1)] = grad[0][a];
            b[(4, col + 1)] = grad[2][a];
            b[(4, col + 2)] = grad[1][a];
            b[(5, col)] = grad[2][a];
            b[(5, col + 2)] = grad[0][a];
        }

        k += b.transpose() * d_mat * b * det;
    });

    if let Some(err) = bad {
        return Err(err);
    }
    Ok(k)
}

/// Consistent nodal load for a constant body-force density.
fn element_body_load(coords: &[[f64; 3]; 8], load: [f64; 3]) -> SMatrix<f64, 24, 1> {
    let mut f = SMatrix::<f64, 24, 1>::zeros();
    for_each_gauss_point(|_, xi, eta, zeta| {
        let n = shape_functions(xi, eta, zeta);
        let d = shape_derivatives(xi, eta, zeta);
        let det = jacobian(coords, &d).determinant();
        for a in 0..8 {
            for axis in 0..3 {
                f[3 * a + axis] += n[a] * load[axis] * det;
            }
        }
    });
    f
}

/// One subdomain's discrete model: stiffness, load, and the partition of its
/// scalar DOFs into interface (`boundary`), `interior`, and `dirichlet` sets.
///
/// The stiffness is stored at full size; Dirichlet elimination is realized by
/// restricting every solve to `interior ∪ boundary`, which keeps the reduced
/// operator symmetric positive definite whenever the constraints remove all
/// rigid modes.
#[derive(Debug, Clone)]
pub struct SubdomainModel {
    pub name: String,
    pub stiffness: CscMatrix<f64>,
    pub load: DVector<f64>,
    /// Interface DOFs (the trace selection), sorted.
    pub boundary: Vec<usize>,
    /// Free non-interface DOFs, sorted.
    pub interior: Vec<usize>,
    /// DOFs with prescribed zero displacement, sorted.
    pub dirichlet: Vec<usize>,
    pub mesh: Option<StructuredMesh>,
}

impl SubdomainModel {
    pub fn n_dofs(&self) -> usize {
        self.stiffness.nrows()
    }

    /// Matrix-level constructor for toy problems without a mesh. Every DOF
    /// not listed as boundary becomes interior.
    pub fn from_matrix(
        name: impl Into<String>,
        stiffness: CscMatrix<f64>,
        load: DVector<f64>,
        boundary: Vec<usize>,
    ) -> Result<Self> {
        let name = name.into();
        if stiffness.nrows() != stiffness.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "subdomain `{name}`: stiffness must be square"
            )));
        }
        if load.len() != stiffness.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "subdomain `{name}`: load length {} does not match {} DOFs",
                load.len(),
                stiffness.nrows()
            )));
        }
        check_symmetry(&name, &stiffness)?;

        let model = SubdomainModel {
            name,
            load,
            boundary: Vec::new(),
            interior: (0..stiffness.nrows()).collect(),
            dirichlet: Vec::new(),
            stiffness,
            mesh: None,
        };
        model.with_interface(&boundary)
    }

    /// Re-partitions the free DOFs so that `dofs` become the interface set.
    pub fn with_interface(mut self, dofs: &[usize]) -> Result<Self> {
        let n = self.n_dofs();
        let mut boundary: Vec<usize> = dofs.to_vec();
        boundary.sort_unstable();
        boundary.dedup();
        if boundary.len() != dofs.len() {
            return Err(Error::DimensionMismatch(format!(
                "subdomain `{}`: interface DOF list contains duplicates",
                self.name
            )));
        }
        if let Some(&bad) = boundary.iter().find(|&&d| d >= n) {
            return Err(Error::DimensionMismatch(format!(
                "subdomain `{}`: interface DOF {bad} out of range ({n} DOFs)",
                self.name
            )));
        }
        if let Some(&bad) = boundary
            .iter()
            .find(|d| self.dirichlet.binary_search(d).is_ok())
        {
            return Err(Error::InvalidLayout(format!(
                "subdomain `{}`: DOF {bad} is both interface and Dirichlet",
                self.name
            )));
        }

        let in_boundary: Vec<bool> = membership(n, &boundary);
        let in_dirichlet: Vec<bool> = membership(n, &self.dirichlet);
        self.interior = (0..n)
            .filter(|&d| !in_boundary[d] && !in_dirichlet[d])
            .collect();
        self.boundary = boundary;
        Ok(self)
    }

    /// Solves the model over all free DOFs (no condensation); returns the
    /// full-length displacement with zeros on the Dirichlet set.
    pub fn solve_constrained(&self) -> Result<DVector<f64>> {
        let mut free: Vec<usize> = self
            .interior
            .iter()
            .chain(self.boundary.iter())
            .copied()
            .collect();
        free.sort_unstable();
        let mut full = DVector::zeros(self.n_dofs());
        if free.is_empty() {
            return Ok(full);
        }
        let k_ff = sparse::extract_block(&self.stiffness, &free, &free);
        let f_f = DVector::from_iterator(free.len(), free.iter().map(|&d| self.load[d]));
        let chol = nalgebra_sparse::factorization::CscCholesky::factor(&k_ff)
            .map_err(|_| Error::SingularInterior {
                name: self.name.clone(),
            })?;
        let u_f = sparse::chol_solve(&chol, &f_f);
        for (k, &d) in free.iter().enumerate() {
            full[d] = u_f[k];
        }
        Ok(full)
    }
}

fn membership(n: usize, sorted: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &d in sorted {
        m[d] = true;
    }
    m
}

fn check_symmetry(name: &str, k: &CscMatrix<f64>) -> Result<()> {
    let kt = k.transpose();
    let max_abs = k.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut defect = 0.0_f64;
    for (i, j, v) in k.triplet_iter() {
        let vt = kt
            .get_entry(i, j)
            .map(|e| e.into_value())
            .unwrap_or(0.0);
        defect = defect.max((v - vt).abs());
    }
    if defect > 1e-12 * max_abs.max(f64::MIN_POSITIVE) {
        return Err(Error::DimensionMismatch(format!(
            "subdomain `{name}`: stiffness is not symmetric (defect {defect:.3e})"
        )));
    }
    Ok(())
}

/// Assembles the sparse stiffness and consistent load of a meshed subdomain.
/// The interface partition starts empty; see [`SubdomainModel::with_interface`].
pub fn assemble(
    mesh: StructuredMesh,
    materials: &MaterialField,
    body_load: [f64; 3],
    name: impl Into<String>,
) -> Result<SubdomainModel> {
    let name = name.into();
    if materials.youngs.len() != mesh.n_elems() || materials.poissons.len() != mesh.n_elems() {
        return Err(Error::DimensionMismatch(format!(
            "subdomain `{name}`: {} elements but {} material entries",
            mesh.n_elems(),
            materials.youngs.len()
        )));
    }

    let n_dofs = mesh.n_dofs();
    let mut coo = CooMatrix::new(n_dofs, n_dofs);
    let mut load = DVector::zeros(n_dofs);

    for (e, conn) in mesh.hex_connectivity.iter().enumerate() {
        let mut coords = [[0.0; 3]; 8];
        for (a, &node) in conn.iter().enumerate() {
            coords[a] = mesh.node_coords[node];
        }
        let ke = element_stiffness(&coords, materials.youngs[e], materials.poissons[e])?;
        let fe = element_body_load(&coords, body_load);

        let dof = |a: usize, axis: usize| 3 * conn[a] + axis;
        for a in 0..8 {
            for ax_a in 0..3 {
                let row = dof(a, ax_a);
                load[row] += fe[3 * a + ax_a];
                for b in 0..8 {
                    for ax_b in 0..3 {
                        let v = ke[(3 * a + ax_a, 3 * b + ax_b)];
                        if v != 0.0 {
                            coo.push(row, dof(b, ax_b), v);
                        }
                    }
                }
            }
        }
    }

    Ok(SubdomainModel {
        name,
        stiffness: CscMatrix::from(&coo),
        load,
        boundary: Vec::new(),
        interior: (0..n_dofs).collect(),
        dirichlet: Vec::new(),
        mesh: Some(mesh),
    })
}

/// Moves `clamped_dofs` into the Dirichlet set (zero prescribed value).
/// Clamping an interface DOF is rejected: the coupling owns those.
pub fn apply_dirichlet(model: SubdomainModel, clamped_dofs: &[usize]) -> Result<SubdomainModel> {
    let mut model = model;
    let n = model.n_dofs();
    let mut clamped: Vec<usize> = clamped_dofs.to_vec();
    clamped.sort_unstable();
    clamped.dedup();
    if let Some(&bad) = clamped.iter().find(|&&d| d >= n) {
        return Err(Error::DimensionMismatch(format!(
            "subdomain `{}`: Dirichlet DOF {bad} out of range ({n} DOFs)",
            model.name
        )));
    }
    if let Some(&bad) = clamped
        .iter()
        .find(|d| model.boundary.binary_search(d).is_ok())
    {
        return Err(Error::InvalidLayout(format!(
            "subdomain `{}`: cannot clamp interface DOF {bad}; remove it from the interface first",
            model.name
        )));
    }

    let mut dirichlet = model.dirichlet.clone();
    dirichlet.extend_from_slice(&clamped);
    dirichlet.sort_unstable();
    dirichlet.dedup();
    let in_dirichlet = membership(n, &dirichlet);
    let in_boundary = membership(n, &model.boundary);
    model.interior = (0..n)
        .filter(|&d| !in_dirichlet[d] && !in_boundary[d])
        .collect();
    model.dirichlet = dirichlet;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_cube_mesh, extract_interface, homogeneous_material, Face};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn unit_cube_coords() -> [[f64; 3]; 8] {
        [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ]
    }

    #[test]
    fn rigid_translations_produce_no_force() {
        let k = element_stiffness(&unit_cube_coords(), 210.0, 0.3).unwrap();
        let k_norm = k.norm();
        for axis in 0..3 {
            let mut u = SMatrix::<f64, 24, 1>::zeros();
            for a in 0..8 {
                u[3 * a + axis] = 1.0;
            }
            let f = k * u;
            assert!(f.amax() <= 1e-10 * k_norm);
        }
    }

    #[test]
    fn element_stiffness_is_symmetric() {
        let k = element_stiffness(&unit_cube_coords(), 3.0, 0.4).unwrap();
        let defect = (k - k.transpose()).amax();
        assert!(defect <= 1e-12 * k.amax());
    }

    #[test]
    fn eigenstructure_has_six_rigid_modes() {
        // Dense eigensolver oracle on the 24x24 element matrix.
        let k = element_stiffness(&unit_cube_coords(), 1.0, 0.3).unwrap();
        let dense = DMatrix::from_fn(24, 24, |i, j| k[(i, j)]);
        let mut eigs: Vec<f64> = dense.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max = eigs[23];
        let near_zero = eigs.iter().filter(|&&l| l.abs() <= 1e-9 * max).count();
        let positive = eigs.iter().filter(|&&l| l > 1e-9 * max).count();
        assert_eq!(near_zero, 6);
        assert_eq!(positive, 18);
    }

    #[test]
    fn degenerate_element_rejected() {
        let mut coords = unit_cube_coords();
        coords.swap(0, 1); // inverted orientation
        let err = element_stiffness(&coords, 1.0, 0.3).unwrap_err();
        assert!(matches!(err, Error::DegenerateElement { .. }));
    }

    #[test]
    fn single_element_assembly_equals_element_matrix() {
        let mesh = build_cube_mesh(1, [0.0; 3], 1.0).unwrap();
        let conn = mesh.hex_connectivity[0];
        let mut coords = [[0.0; 3]; 8];
        for (a, &node) in conn.iter().enumerate() {
            coords[a] = mesh.node_coords[node];
        }
        let ke = element_stiffness(&coords, 5.0, 0.25).unwrap();

        let mat = homogeneous_material(&mesh, 5.0, 0.25).unwrap();
        let model = assemble(mesh, &mat, [0.0; 3], "one").unwrap();
        for a in 0..8 {
            for b in 0..8 {
                for ax_a in 0..3 {
                    for ax_b in 0..3 {
                        let got = model
                            .stiffness
                            .get_entry(3 * conn[a] + ax_a, 3 * conn[b] + ax_b)
                            .map(|e| e.into_value())
                            .unwrap_or(0.0);
                        assert_relative_eq!(
                            got,
                            ke[(3 * a + ax_a, 3 * b + ax_b)],
                            max_relative = 1e-14,
                            epsilon = 1e-14
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn consistent_load_integrates_body_force() {
        let mesh = build_cube_mesh(3, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 1.0, 0.3).unwrap();
        let model = assemble(mesh, &mat, [1.0, 1.0, 1.0], "cube").unwrap();
        for axis in 0..3 {
            let total: f64 = (0..model.n_dofs() / 3).map(|n| model.load[3 * n + axis]).sum();
            assert!((total - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn clamped_inclusion_patch_is_positive_definite() {
        let mesh = build_cube_mesh(3, [0.0; 3], 1.0).unwrap();
        let mat = crate::mesh::assign_inclusion(&mesh, 1_000.0, 10.0, 0.3, 0.5).unwrap();
        let clamp = extract_interface(&mesh, &[Face::ZMin]).unwrap();
        let model = assemble(mesh, &mat, [1.0, 1.0, 1.0], "patch").unwrap();
        let model = apply_dirichlet(model, &clamp.dofs).unwrap();
        // Factorization oracle: the reduced operator must be SPD.
        assert!(model.solve_constrained().is_ok());
    }

    #[test]
    fn empty_clamp_set_is_identity() {
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 1.0, 0.3).unwrap();
        let model = assemble(mesh, &mat, [0.0; 3], "m").unwrap();
        let before = (model.boundary.clone(), model.interior.clone(), model.dirichlet.clone());
        let model = apply_dirichlet(model, &[]).unwrap();
        assert_eq!(before, (model.boundary, model.interior, model.dirichlet));
    }

    #[test]
    fn clamp_everything_yields_empty_reduced_system() {
        let mesh = build_cube_mesh(1, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 1.0, 0.3).unwrap();
        let model = assemble(mesh, &mat, [1.0; 3], "m").unwrap();
        let all: Vec<usize> = (0..model.n_dofs()).collect();
        let model = apply_dirichlet(model, &all).unwrap();
        assert!(model.interior.is_empty() && model.boundary.is_empty());
        let u = model.solve_constrained().unwrap();
        assert!(u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn clamping_interface_dof_is_rejected() {
        let mesh = build_cube_mesh(1, [0.0; 3], 1.0).unwrap();
        let sel = extract_interface(&mesh, &[Face::XMax]).unwrap();
        let mat = homogeneous_material(&mesh, 1.0, 0.3).unwrap();
        let model = assemble(mesh, &mat, [0.0; 3], "m")
            .unwrap()
            .with_interface(&sel.dofs)
            .unwrap();
        let err = apply_dirichlet(model, &sel.dofs[..1]).unwrap_err();
        assert!(matches!(err, Error::InvalidLayout(_)));
    }

    #[test]
    fn assembly_is_permutation_stable() {
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 10.0, 0.3).unwrap();
        let reference = assemble(mesh.clone(), &mat, [1.0; 3], "a").unwrap();

        let mut shuffled = mesh;
        shuffled.hex_connectivity.reverse();
        let permuted_mat = MaterialField {
            youngs: mat.youngs.iter().rev().copied().collect(),
            poissons: mat.poissons.iter().rev().copied().collect(),
            inclusion_radius_fraction: mat.inclusion_radius_fraction,
        };
        let other = assemble(shuffled, &permuted_mat, [1.0; 3], "b").unwrap();

        let scale = reference.stiffness.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (i, j, v) in reference.stiffness.triplet_iter() {
            let w = other.stiffness.get_entry(i, j).map(|e| e.into_value()).unwrap_or(0.0);
            assert!((v - w).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn energy_is_nonnegative() {
        use rand::{rngs::SmallRng, Rng, SeedableRng};
        let mesh = build_cube_mesh(2, [0.0; 3], 1.0).unwrap();
        let mat = homogeneous_material(&mesh, 100.0, 0.35).unwrap();
        let model = assemble(mesh, &mat, [0.0; 3], "m").unwrap();
        let n = model.n_dofs();
        let mut rng = SmallRng::seed_from_u64(7);
        let scale = model.stiffness.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for _ in 0..100 {
            let u = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let ku = sparse::spmv(&model.stiffness, &u);
            let energy = u.dot(&ku);
            assert!(energy >= -1e-10 * scale * u.norm_squared());
        }
    }
}
