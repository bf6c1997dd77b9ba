//! Patch-grid layouts: a beam of face-adjacent cubes, each carried by a
//! coarse model and optionally refined by a fine patch with a spherical
//! inclusion.
//!
//! The global interface numbering is built by deduplicating node positions
//! across cubes. A cube face belongs to the interface when it is shared with
//! a neighbor cube, or when the cube is a patch (a patch's whole surface
//! participates in the coupling). Nodes on the clamped domain face are
//! removed from the interface and constrained in the local models instead.

use std::collections::HashMap;

use crate::coupling::{CouplingProblem, InterfaceSpace};
use crate::error::{Error, Result};
use crate::fem::{apply_dirichlet, assemble};
use crate::interp::SparseInterp;
use crate::mesh::{
    assign_inclusion, build_cube_mesh, homogeneous_material, Face, StructuredMesh,
};
use crate::schur::condense;

/// Which grid cells carry a fine patch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatchCells {
    /// Every cell is refined; no complementary zone.
    All,
    /// Only the listed cells (grid coordinates) are refined.
    Only(Vec<[usize; 3]>),
}

/// A grid of cubes with coarse/fine resolutions and beam-style loading.
#[derive(Debug, Clone)]
pub struct GridLayout {
    /// Number of cubes along each axis.
    pub grid: [usize; 3],
    pub cube_edge: f64,
    /// Elements per edge of each coarse cube.
    pub coarse_elems: usize,
    /// Elements per edge of each fine patch; integer multiple of `coarse_elems`.
    pub fine_elems: usize,
    pub patch_cells: PatchCells,
    /// Domain face with zero prescribed displacement.
    pub clamped_face: Option<Face>,
    pub e_matrix: f64,
    pub e_ratio: f64,
    pub nu: f64,
    pub inclusion_radius_fraction: f64,
    pub body_load: [f64; 3],
}

impl GridLayout {
    /// The validation beam: heterogeneous cubes with a ten-times-softer
    /// spherical inclusion in each fine patch, unit body load on every axis,
    /// one end clamped, full patch coverage.
    pub fn beam(grid: [usize; 3], coarse_elems: usize, fine_elems: usize) -> Self {
        GridLayout {
            grid,
            cube_edge: 1.0,
            coarse_elems,
            fine_elems,
            patch_cells: PatchCells::All,
            clamped_face: Some(Face::ZMin),
            e_matrix: 1000.0,
            e_ratio: 10.0,
            nu: 0.3,
            inclusion_radius_fraction: 0.5,
            body_load: [1.0, 1.0, 1.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.iter().any(|&n| n < 1) {
            return Err(Error::InvalidLayout("grid dimensions must be >= 1".into()));
        }
        if self.coarse_elems < 1 {
            return Err(Error::InvalidLayout("coarse_elems must be >= 1".into()));
        }
        if self.fine_elems < self.coarse_elems || self.fine_elems % self.coarse_elems != 0 {
            return Err(Error::InvalidLayout(format!(
                "fine_elems ({}) must be an integer multiple of coarse_elems ({})",
                self.fine_elems, self.coarse_elems
            )));
        }
        if !(self.cube_edge > 0.0) {
            return Err(Error::InvalidLayout("cube_edge must be positive".into()));
        }
        let n_cells = self.grid[0] * self.grid[1] * self.grid[2];
        match &self.patch_cells {
            PatchCells::All => {}
            PatchCells::Only(cells) => {
                if cells.is_empty() {
                    return Err(Error::InvalidLayout("at least one patch cell required".into()));
                }
                for c in cells {
                    if (0..3).any(|a| c[a] >= self.grid[a]) {
                        return Err(Error::InvalidLayout(format!(
                            "patch cell {c:?} outside the {:?} grid",
                            self.grid
                        )));
                    }
                }
                if cells.len() > n_cells {
                    return Err(Error::InvalidLayout("more patch cells than grid cells".into()));
                }
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.grid[0] * self.grid[1] * self.grid[2]
    }

    fn cells(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [nx, ny, nz] = self.grid;
        (0..nz).flat_map(move |z| (0..ny).flat_map(move |y| (0..nx).map(move |x| [x, y, z])))
    }

    fn is_patch(&self, cell: [usize; 3]) -> bool {
        match &self.patch_cells {
            PatchCells::All => true,
            PatchCells::Only(cells) => cells.contains(&cell),
        }
    }

    fn has_neighbor(&self, cell: [usize; 3], face: Face) -> bool {
        let axis = face.axis();
        if face.is_max() {
            cell[axis] + 1 < self.grid[axis]
        } else {
            cell[axis] > 0
        }
    }

    /// Faces of one cell that belong to the global interface.
    fn interface_faces(&self, cell: [usize; 3]) -> Vec<Face> {
        Face::ALL
            .into_iter()
            .filter(|&f| self.is_patch(cell) || self.has_neighbor(cell, f))
            .collect()
    }

    fn cell_origin(&self, cell: [usize; 3]) -> [f64; 3] {
        [
            cell[0] as f64 * self.cube_edge,
            cell[1] as f64 * self.cube_edge,
            cell[2] as f64 * self.cube_edge,
        ]
    }

    fn clamp_plane(&self) -> Option<(usize, f64)> {
        self.clamped_face.map(|f| {
            let coord = if f.is_max() {
                self.grid[f.axis()] as f64 * self.cube_edge
            } else {
                0.0
            };
            (f.axis(), coord)
        })
    }

    /// Nodes of a mesh lying on the clamped domain plane.
    fn clamped_nodes(&self, mesh: &StructuredMesh) -> Vec<usize> {
        let Some((axis, coord)) = self.clamp_plane() else {
            return Vec::new();
        };
        let tol = 1e-12 * self.cube_edge;
        (0..mesh.n_nodes())
            .filter(|&n| (mesh.node_coords[n][axis] - coord).abs() <= tol)
            .collect()
    }

    /// Geometric construction of the interface space: global numbering,
    /// assembly maps and interpolators, plus the per-cell index sets needed
    /// to build the models.
    pub fn build_interface_space(&self) -> Result<LayoutPlan> {
        self.validate()?;
        let mut registry = NodeRegistry::new(1e-9 * self.cube_edge);
        let mut cells = Vec::with_capacity(self.n_cells());

        for cell in self.cells() {
            let coarse_mesh = build_cube_mesh(self.coarse_elems, self.cell_origin(cell), self.cube_edge)?;
            let faces = self.interface_faces(cell);
            let clamped_coarse = self.clamped_nodes(&coarse_mesh);

            let mut boundary_nodes: Vec<usize> =
                faces.iter().flat_map(|&f| coarse_mesh.face_nodes(f)).collect();
            boundary_nodes.sort_unstable();
            boundary_nodes.dedup();
            boundary_nodes.retain(|n| clamped_coarse.binary_search(n).is_err());

            // Assembly map: one global DOF per local interface DOF, in the
            // order of the sorted local DOF list.
            let mut map = Vec::with_capacity(3 * boundary_nodes.len());
            for &node in &boundary_nodes {
                let gnode = registry.insert(coarse_mesh.node_coords[node])?;
                for axis in 0..3 {
                    map.push(3 * gnode + axis);
                }
            }

            let is_patch = self.is_patch(cell);
            let fine = if is_patch {
                let fine_mesh = build_cube_mesh(self.fine_elems, self.cell_origin(cell), self.cube_edge)?;
                let clamped_fine = self.clamped_nodes(&fine_mesh);
                let mut fine_nodes: Vec<usize> =
                    faces.iter().flat_map(|&f| fine_mesh.face_nodes(f)).collect();
                fine_nodes.sort_unstable();
                fine_nodes.dedup();
                fine_nodes.retain(|n| clamped_fine.binary_search(n).is_err());

                let interp =
                    self.build_interpolator(&fine_nodes, &boundary_nodes, &clamped_coarse)?;
                Some(FinePlan {
                    mesh: fine_mesh,
                    boundary_nodes: fine_nodes,
                    clamped_nodes: clamped_fine,
                    interp,
                })
            } else {
                None
            };

            cells.push(CellPlan {
                cell,
                coarse_mesh,
                coarse_boundary_nodes: boundary_nodes,
                coarse_clamped_nodes: clamped_coarse,
                map,
                fine,
            });
        }

        let maps = cells.iter().map(|c| c.map.clone()).collect();
        let interps = cells
            .iter()
            .map(|c| c.fine.as_ref().map(|f| f.interp.clone()))
            .collect();
        let space = InterfaceSpace::new(3 * registry.len(), maps, interps)?;
        Ok(LayoutPlan { space, cells })
    }

    /// Bilinear face interpolation from the coarse surface nodes to the fine
    /// surface nodes of the same cube. Rows are a partition of unity before
    /// clamped coarse columns are dropped.
    fn build_interpolator(
        &self,
        fine_nodes: &[usize],
        coarse_boundary_nodes: &[usize],
        clamped_coarse: &[usize],
    ) -> Result<SparseInterp> {
        let c = self.coarse_elems;
        let f = self.fine_elems;
        let m = f / c;

        // Coarse node grid position -> column block (node slot in the sorted
        // boundary list).
        let coarse_n = c + 1;
        let coarse_index =
            |g: [usize; 3]| g[0] + coarse_n * (g[1] + coarse_n * g[2]);
        let mut col_of_node = vec![None; coarse_n * coarse_n * coarse_n];
        for (slot, &node) in coarse_boundary_nodes.iter().enumerate() {
            col_of_node[node] = Some(slot);
        }
        let clamped = |node: usize| clamped_coarse.binary_search(&node).is_ok();

        let fine_n = f + 1;
        let fine_grid = |node: usize| {
            let x = node % fine_n;
            let y = (node / fine_n) % fine_n;
            let z = node / (fine_n * fine_n);
            [x, y, z]
        };

        let mut rows = Vec::with_capacity(3 * fine_nodes.len());
        for &fnode in fine_nodes {
            let g = fine_grid(fnode);
            let face = Face::ALL
                .into_iter()
                .find(|&fc| {
                    let a = fc.axis();
                    if fc.is_max() { g[a] == f } else { g[a] == 0 }
                })
                .ok_or_else(|| {
                    Error::InvalidLayout(format!(
                        "fine node {fnode} marked as interface but not on the cube surface"
                    ))
                })?;

            let axis = face.axis();
            let (a1, a2) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let cell1 = (g[a1] / m).min(c - 1);
            let cell2 = (g[a2] / m).min(c - 1);
            let xi = (g[a1] - cell1 * m) as f64 / m as f64;
            let eta = (g[a2] - cell2 * m) as f64 / m as f64;
            let fixed = if face.is_max() { c } else { 0 };

            let corner = |d1: usize, d2: usize, w: f64| {
                let mut gc = [0usize; 3];
                gc[axis] = fixed;
                gc[a1] = cell1 + d1;
                gc[a2] = cell2 + d2;
                (coarse_index(gc), w)
            };
            let candidates = [
                corner(0, 0, (1.0 - xi) * (1.0 - eta)),
                corner(1, 0, xi * (1.0 - eta)),
                corner(0, 1, (1.0 - xi) * eta),
                corner(1, 1, xi * eta),
            ];

            // Partition-of-unity check on the geometric weights, before any
            // clamped column is dropped.
            let full_sum: f64 = candidates.iter().map(|&(_, w)| w).sum();
            if (full_sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidLayout(format!(
                    "interpolation weights for fine node {fnode} sum to {full_sum}"
                )));
            }

            for axis_dof in 0..3 {
                let mut row = Vec::new();
                for &(cnode, w) in &candidates {
                    if w == 0.0 {
                        continue;
                    }
                    if clamped(cnode) {
                        continue; // zero prescribed displacement contributes nothing
                    }
                    let slot = col_of_node[cnode].ok_or_else(|| {
                        Error::InvalidLayout(format!(
                            "coarse node {cnode} needed by the interpolation is not on the interface"
                        ))
                    })?;
                    row.push((3 * slot + axis_dof, w));
                }
                rows.push(row);
            }
        }
        SparseInterp::new(3 * coarse_boundary_nodes.len(), rows)
    }

    /// Builds, condenses, and assembles the full coupled problem.
    pub fn build_problem(&self) -> Result<CouplingProblem> {
        let plan = self.build_interface_space()?;
        let mut coarse = Vec::with_capacity(plan.cells.len());
        let mut fine = Vec::with_capacity(plan.cells.len());

        for cell_plan in &plan.cells {
            let cell = cell_plan.cell;
            let name = format!("cube({},{},{})", cell[0], cell[1], cell[2]);

            let material =
                homogeneous_material(&cell_plan.coarse_mesh, self.e_matrix, self.nu)?;
            let model = assemble(
                cell_plan.coarse_mesh.clone(),
                &material,
                self.body_load,
                format!("{name}/coarse"),
            )?
            .with_interface(&node_dofs(&cell_plan.coarse_boundary_nodes))?;
            let model = apply_dirichlet(model, &node_dofs(&cell_plan.coarse_clamped_nodes))?;
            coarse.push(condense(model)?);

            match &cell_plan.fine {
                Some(fp) => {
                    let material = assign_inclusion(
                        &fp.mesh,
                        self.e_matrix,
                        self.e_ratio,
                        self.nu,
                        self.inclusion_radius_fraction,
                    )?;
                    let model = assemble(
                        fp.mesh.clone(),
                        &material,
                        self.body_load,
                        format!("{name}/fine"),
                    )?
                    .with_interface(&node_dofs(&fp.boundary_nodes))?;
                    let model = apply_dirichlet(model, &node_dofs(&fp.clamped_nodes))?;
                    fine.push(Some(condense(model)?));
                }
                None => fine.push(None),
            }
        }

        CouplingProblem::new(plan.space, coarse, fine)
    }

    /// Meshes of every model, for debug dumps.
    pub fn meshes(&self) -> Result<Vec<(String, StructuredMesh)>> {
        let plan = self.build_interface_space()?;
        let mut out = Vec::new();
        for cell_plan in &plan.cells {
            let cell = cell_plan.cell;
            let name = format!("cube_{}_{}_{}", cell[0], cell[1], cell[2]);
            out.push((format!("{name}_coarse"), cell_plan.coarse_mesh.clone()));
            if let Some(fp) = &cell_plan.fine {
                out.push((format!("{name}_fine"), fp.mesh.clone()));
            }
        }
        Ok(out)
    }
}

fn node_dofs(nodes: &[usize]) -> Vec<usize> {
    nodes
        .iter()
        .flat_map(|&n| (0..3).map(move |axis| 3 * n + axis))
        .collect()
}

/// Geometric plan: interface space plus per-cell meshes and index sets.
#[derive(Debug)]
pub struct LayoutPlan {
    pub space: InterfaceSpace,
    pub cells: Vec<CellPlan>,
}

#[derive(Debug)]
pub struct CellPlan {
    pub cell: [usize; 3],
    pub coarse_mesh: StructuredMesh,
    pub coarse_boundary_nodes: Vec<usize>,
    pub coarse_clamped_nodes: Vec<usize>,
    pub map: Vec<usize>,
    pub fine: Option<FinePlan>,
}

#[derive(Debug)]
pub struct FinePlan {
    pub mesh: StructuredMesh,
    pub boundary_nodes: Vec<usize>,
    pub clamped_nodes: Vec<usize>,
    pub interp: SparseInterp,
}

/// Position-based node deduplication with a quantized hash and a
/// neighbor-cell probe that catches near-coincident nodes falling into
/// different cells.
struct NodeRegistry {
    quantum: f64,
    map: HashMap<[i64; 3], (usize, [f64; 3])>,
    count: usize,
}

impl NodeRegistry {
    fn new(quantum: f64) -> Self {
        NodeRegistry {
            quantum,
            map: HashMap::new(),
            count: 0,
        }
    }

    fn len(&self) -> usize {
        self.count
    }

    fn key(&self, p: [f64; 3]) -> [i64; 3] {
        [
            (p[0] / self.quantum).round() as i64,
            (p[1] / self.quantum).round() as i64,
            (p[2] / self.quantum).round() as i64,
        ]
    }

    fn insert(&mut self, p: [f64; 3]) -> Result<usize> {
        let key = self.key(p);
        if let Some(&(id, existing)) = self.map.get(&key) {
            if max_dist(existing, p) > self.quantum {
                return Err(Error::InconsistentGeometry { a: existing, b: p });
            }
            return Ok(id);
        }
        for dx in -1..=1_i64 {
            for dy in -1..=1_i64 {
                for dz in -1..=1_i64 {
                    if (dx, dy, dz) == (0, 0, 0) {
                        continue;
                    }
                    let nk = [key[0] + dx, key[1] + dy, key[2] + dz];
                    if let Some(&(_, other)) = self.map.get(&nk) {
                        if max_dist(other, p) <= self.quantum {
                            return Err(Error::InconsistentGeometry { a: other, b: p });
                        }
                    }
                }
            }
        }
        let id = self.count;
        self.map.insert(key, (id, p));
        self.count += 1;
        Ok(id)
    }
}

fn max_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}
