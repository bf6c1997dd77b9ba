//! Structured hexahedral meshes for cubic subdomains.
//!
//! Nodes are numbered lexicographically (x fastest), so two cubes built with
//! the same resolution produce geometrically coincident nodes on shared
//! faces. Heterogeneity is a spherical inclusion assigned per element by a
//! centroid test.

use std::io::Write;

use crate::error::{Error, Result};

/// The six axis-aligned faces of a cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    /// Coordinate axis normal to the face (0 = x, 1 = y, 2 = z).
    pub fn axis(self) -> usize {
        match self {
            Face::XMin | Face::XMax => 0,
            Face::YMin | Face::YMax => 1,
            Face::ZMin | Face::ZMax => 2,
        }
    }

    /// True for the max-side face of its axis.
    pub fn is_max(self) -> bool {
        matches!(self, Face::XMax | Face::YMax | Face::ZMax)
    }

    /// The face of an adjacent cube that coincides with this one.
    pub fn opposite(self) -> Face {
        match self {
            Face::XMin => Face::XMax,
            Face::XMax => Face::XMin,
            Face::YMin => Face::YMax,
            Face::YMax => Face::YMin,
            Face::ZMin => Face::ZMax,
            Face::ZMax => Face::ZMin,
        }
    }
}

impl std::str::FromStr for Face {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "xmin" | "-x" => Ok(Face::XMin),
            "xmax" | "+x" => Ok(Face::XMax),
            "ymin" | "-y" => Ok(Face::YMin),
            "ymax" | "+y" => Ok(Face::YMax),
            "zmin" | "-z" => Ok(Face::ZMin),
            "zmax" | "+z" => Ok(Face::ZMax),
            other => Err(format!("unknown face `{other}`")),
        }
    }
}

/// A structured mesh of one cube: `elems_per_edge`³ trilinear hexahedra.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMesh {
    /// Node positions, length `(elems_per_edge + 1)³`.
    pub node_coords: Vec<[f64; 3]>,
    /// Eight node indices per hexahedron, right-handed ordering.
    pub hex_connectivity: Vec<[usize; 8]>,
    pub elems_per_edge: usize,
    pub origin: [f64; 3],
    pub edge_length: f64,
}

impl StructuredMesh {
    pub fn n_nodes(&self) -> usize {
        self.node_coords.len()
    }

    pub fn n_elems(&self) -> usize {
        self.hex_connectivity.len()
    }

    /// Scalar displacement unknowns: three per node.
    pub fn n_dofs(&self) -> usize {
        3 * self.n_nodes()
    }

    /// Lexicographic node index of grid position `(ix, iy, iz)`.
    pub fn node_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let n = self.elems_per_edge + 1;
        ix + n * (iy + n * iz)
    }

    /// Nodes lying on one face of the cube, sorted ascending.
    pub fn face_nodes(&self, face: Face) -> Vec<usize> {
        let n = self.elems_per_edge + 1;
        let fixed = if face.is_max() { n - 1 } else { 0 };
        let mut nodes = Vec::with_capacity(n * n);
        for b in 0..n {
            for a in 0..n {
                let idx = match face.axis() {
                    0 => self.node_index(fixed, a, b),
                    1 => self.node_index(a, fixed, b),
                    _ => self.node_index(a, b, fixed),
                };
                nodes.push(idx);
            }
        }
        nodes.sort_unstable();
        nodes
    }

    /// Centroid of element `e`.
    pub fn centroid(&self, e: usize) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &node in &self.hex_connectivity[e] {
            for (axis, v) in c.iter_mut().enumerate() {
                *v += self.node_coords[node][axis] / 8.0;
            }
        }
        c
    }

    /// Plain-text dump, one node / element per line, for debug inspection.
    pub fn write_text(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(
            out,
            "mesh elems_per_edge={} origin={:?} edge_length={}",
            self.elems_per_edge, self.origin, self.edge_length
        )?;
        for (i, p) in self.node_coords.iter().enumerate() {
            writeln!(out, "node {i} {} {} {}", p[0], p[1], p[2])?;
        }
        for (e, conn) in self.hex_connectivity.iter().enumerate() {
            let ids: Vec<String> = conn.iter().map(|n| n.to_string()).collect();
            writeln!(out, "hex {e} {}", ids.join(" "))?;
        }
        Ok(())
    }
}

/// Builds a cube of `elems_per_edge`³ hexahedra with lexicographic node
/// numbering (x fastest).
pub fn build_cube_mesh(
    elems_per_edge: usize,
    origin: [f64; 3],
    edge_length: f64,
) -> Result<StructuredMesh> {
    if elems_per_edge < 1 {
        return Err(Error::InvalidMesh(
            "elems_per_edge must be at least 1".into(),
        ));
    }
    if !(edge_length > 0.0) {
        return Err(Error::InvalidMesh(format!(
            "edge_length must be positive, got {edge_length}"
        )));
    }

    let n = elems_per_edge + 1;
    let h = edge_length / elems_per_edge as f64;
    let mut node_coords = Vec::with_capacity(n * n * n);
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                node_coords.push([
                    origin[0] + ix as f64 * h,
                    origin[1] + iy as f64 * h,
                    origin[2] + iz as f64 * h,
                ]);
            }
        }
    }

    let idx = |ix: usize, iy: usize, iz: usize| ix + n * (iy + n * iz);
    let mut hex_connectivity = Vec::with_capacity(elems_per_edge.pow(3));
    for ez in 0..elems_per_edge {
        for ey in 0..elems_per_edge {
            for ex in 0..elems_per_edge {
                // Right-handed corner ordering: bottom face counter-clockwise,
                // then the top face in the same sweep.
                hex_connectivity.push([
                    idx(ex, ey, ez),
                    idx(ex + 1, ey, ez),
                    idx(ex + 1, ey + 1, ez),
                    idx(ex, ey + 1, ez),
                    idx(ex, ey, ez + 1),
                    idx(ex + 1, ey, ez + 1),
                    idx(ex + 1, ey + 1, ez + 1),
                    idx(ex, ey + 1, ez + 1),
                ]);
            }
        }
    }

    Ok(StructuredMesh {
        node_coords,
        hex_connectivity,
        elems_per_edge,
        origin,
        edge_length,
    })
}

/// Per-element isotropic material parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    /// Young modulus per element, all positive.
    pub youngs: Vec<f64>,
    /// Poisson ratio per element, each in `[0, 0.5)`.
    pub poissons: Vec<f64>,
    pub inclusion_radius_fraction: f64,
}

impl MaterialField {
    fn validate(&self) -> Result<()> {
        if let Some(e) = self.youngs.iter().find(|e| !(**e > 0.0)) {
            return Err(Error::InvalidMaterial(format!(
                "Young modulus must be positive, got {e}"
            )));
        }
        if let Some(nu) = self.poissons.iter().find(|nu| !(0.0..0.5).contains(*nu)) {
            return Err(Error::InvalidMaterial(format!(
                "nu must lie in [0, 0.5), got {nu}"
            )));
        }
        Ok(())
    }
}

/// Uniform material over the whole mesh.
pub fn homogeneous_material(mesh: &StructuredMesh, youngs: f64, nu: f64) -> Result<MaterialField> {
    let field = MaterialField {
        youngs: vec![youngs; mesh.n_elems()],
        poissons: vec![nu; mesh.n_elems()],
        inclusion_radius_fraction: 0.0,
    };
    field.validate()?;
    Ok(field)
}

/// Assigns `e_matrix / e_ratio` to every element whose centroid lies within
/// `radius_fraction * edge_length / 2` of the cube center, `e_matrix`
/// elsewhere. Poisson ratio is constant.
pub fn assign_inclusion(
    mesh: &StructuredMesh,
    e_matrix: f64,
    e_ratio: f64,
    nu: f64,
    radius_fraction: f64,
) -> Result<MaterialField> {
    if !(0.0..1.0).contains(&radius_fraction) {
        return Err(Error::InvalidMaterial(format!(
            "inclusion_radius_fraction must lie in [0, 1), got {radius_fraction}"
        )));
    }
    if !(e_ratio > 0.0) {
        return Err(Error::InvalidMaterial(format!(
            "e_ratio must be positive, got {e_ratio}"
        )));
    }

    let center = [
        mesh.origin[0] + 0.5 * mesh.edge_length,
        mesh.origin[1] + 0.5 * mesh.edge_length,
        mesh.origin[2] + 0.5 * mesh.edge_length,
    ];
    let radius = radius_fraction * mesh.edge_length / 2.0;
    let youngs = (0..mesh.n_elems())
        .map(|e| {
            let c = mesh.centroid(e);
            let dist2 = (0..3).map(|k| (c[k] - center[k]).powi(2)).sum::<f64>();
            if dist2 <= radius * radius {
                e_matrix / e_ratio
            } else {
                e_matrix
            }
        })
        .collect();

    let field = MaterialField {
        youngs,
        poissons: vec![nu; mesh.n_elems()],
        inclusion_radius_fraction: radius_fraction,
    };
    field.validate()?;
    Ok(field)
}

/// Sorted, duplicate-free scalar DOF indices of the selected faces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceSelector {
    pub faces: Vec<Face>,
    pub dofs: Vec<usize>,
}

/// Collects the scalar DOFs (three per node) of every node on the selected
/// faces.
pub fn extract_interface(mesh: &StructuredMesh, faces: &[Face]) -> Result<InterfaceSelector> {
    if faces.is_empty() {
        return Err(Error::InvalidMesh(
            "interface selector must name at least one face".into(),
        ));
    }
    let mut nodes: Vec<usize> = faces.iter().flat_map(|f| mesh.face_nodes(*f)).collect();
    nodes.sort_unstable();
    nodes.dedup();

    let tol = 1e-12 * mesh.edge_length;
    for &node in &nodes {
        let p = mesh.node_coords[node];
        let on_selected = faces.iter().any(|f| {
            let plane = if f.is_max() {
                mesh.origin[f.axis()] + mesh.edge_length
            } else {
                mesh.origin[f.axis()]
            };
            (p[f.axis()] - plane).abs() <= tol
        });
        if !on_selected {
            return Err(Error::InvalidMesh(format!(
                "node {node} at {p:?} is not on any selected face"
            )));
        }
    }

    let dofs = nodes
        .iter()
        .flat_map(|&n| (0..3).map(move |axis| 3 * n + axis))
        .collect();
    Ok(InterfaceSelector {
        faces: faces.to_vec(),
        dofs,
    })
}
