//! Offline field library: A(p, θ) and 𝒢(p, θ) tabulated over the
//! anti-collision workspace of each configured polar angle.
//!
//! Storage is one flat f64 block per θ, 39 values per node in node-major
//! order (x fastest, then y, then z):
//!
//! ```text
//! [a1x a1y a1z  a2x a2y a2z  a3x a3y a3z  px py pz]   12 actuation floats
//! [G1 row-major (9)] [G2 (9)] [G3 (9)]                27 gradient floats
//! ```
//!
//! Nodes whose evaluation fails a domain check (winding mask, map bounds,
//! stencil) keep their position but carry NaN field data; queries touching
//! them are rejected rather than interpolated across.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actuation::{ActuationMatrix, CoilAssembly, GradientBasis, Mat3, Vec3};
use crate::error::{Error, Result};
use crate::mechanism::Mechanism;

pub const FLOATS_PER_NODE: usize = 39;

/// Spatial grid specification common to every θ block.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LibraryGridSpec {
    /// Half extent of the x and y span, m (grid covers [-x_half, x_half]).
    pub x_half: f64,
    /// Node spacing in x, y and z, m.
    pub step: f64,
    /// Lower z bound of every block, m; the upper bound is z_limit(θ).
    pub z_min: f64,
}

impl Default for LibraryGridSpec {
    fn default() -> Self {
        LibraryGridSpec { x_half: 0.05, step: 0.0025, z_min: -0.30 }
    }
}

impl LibraryGridSpec {
    pub fn lateral_nodes(&self) -> usize {
        (2.0 * self.x_half / self.step).round() as usize + 1
    }

    pub fn z_nodes(&self, z_limit: f64) -> usize {
        ((z_limit - self.z_min) / self.step + 1e-9).floor() as usize + 1
    }
}

/// One θ block: its z grid and the per-node data slab.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaBlock {
    pub theta: f64,
    pub z_limit: f64,
    pub nz: usize,
    /// len = nx * ny * nz * FLOATS_PER_NODE, x fastest, then y, then z.
    pub data: Vec<f64>,
}

/// Provenance recorded alongside the data and echoed into the file header.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct LibraryMeta {
    /// Canonical JSON of the generating configuration.
    pub config_json: String,
    /// SHA-256 of `config_json`.
    pub config_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldLibrary {
    pub grid: LibraryGridSpec,
    pub fd_step: f64,
    pub blocks: Vec<ThetaBlock>,
    pub meta: LibraryMeta,
}

impl FieldLibrary {
    pub fn theta_values(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.theta).collect()
    }

    pub fn thetas_deg(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.theta.to_degrees()).collect()
    }

    fn block(&self, theta: f64) -> Result<&ThetaBlock> {
        self.blocks
            .iter()
            .find(|b| (b.theta - theta).abs() < 1e-9)
            .ok_or_else(|| Error::UnknownTheta {
                theta_deg: theta.to_degrees(),
                available: self.thetas_deg(),
            })
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.grid.x_half + i as f64 * self.grid.step
    }

    pub fn z_coord(&self, iz: usize) -> f64 {
        self.grid.z_min + iz as f64 * self.grid.step
    }

    pub fn node(&self, block: &ThetaBlock, ix: usize, iy: usize, iz: usize) -> &[f64] {
        let nx = self.grid.lateral_nodes();
        let ny = nx;
        let idx = (iz * ny + iy) * nx + ix;
        &block.data[idx * FLOATS_PER_NODE..(idx + 1) * FLOATS_PER_NODE]
    }

    pub fn node_is_valid(node: &[f64]) -> bool {
        node.iter().all(|v| v.is_finite())
    }

    /// Trilinear interpolation of A and 𝒢 at (p, θ). θ must match one of the
    /// library's angles exactly; there is no interpolation across θ.
    pub fn query(&self, p: &Vec3, theta: f64) -> Result<(ActuationMatrix, GradientBasis)> {
        let block = self.block(theta)?;
        let nx = self.grid.lateral_nodes();
        let h = self.grid.step;
        let fx = (p.x + self.grid.x_half) / h;
        let fy = (p.y + self.grid.x_half) / h;
        let fz = (p.z - self.grid.z_min) / h;
        let out_of_range = |f: f64, n: usize| f < -1e-9 || f > (n - 1) as f64 + 1e-9;
        if out_of_range(fx, nx) || out_of_range(fy, nx) || out_of_range(fz, block.nz) {
            return Err(Error::OutsideLibrary {
                x: p.x,
                y: p.y,
                z: p.z,
                theta_deg: theta.to_degrees(),
            });
        }
        let cell = |f: f64, n: usize| -> (usize, f64) {
            let i = (f.floor().max(0.0) as usize).min(n - 2);
            (i, (f - i as f64).clamp(0.0, 1.0))
        };
        let (ix, tx) = cell(fx, nx);
        let (iy, ty) = cell(fy, nx);
        let (iz, tz) = cell(fz, block.nz);

        let mut acc = [0.0_f64; FLOATS_PER_NODE];
        for (dz, wz) in [(0, 1.0 - tz), (1, tz)] {
            for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
                for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
                    let w = wx * wy * wz;
                    let node = self.node(block, ix + dx, iy + dy, iz + dz);
                    if !Self::node_is_valid(node) {
                        return Err(Error::InvalidLibraryNode { x: p.x, y: p.y, z: p.z });
                    }
                    for (a, v) in acc.iter_mut().zip(node) {
                        *a += w * v;
                    }
                }
            }
        }
        let mut columns = Mat3::zeros();
        for k in 0..3 {
            columns.set_column(k, &Vec3::new(acc[3 * k], acc[3 * k + 1], acc[3 * k + 2]));
        }
        let mut tensors = [Mat3::zeros(); 3];
        for k in 0..3 {
            for m in 0..3 {
                for n in 0..3 {
                    tensors[k][(m, n)] = acc[12 + 9 * k + 3 * m + n];
                }
            }
        }
        Ok((
            ActuationMatrix { columns, position: *p, theta },
            GradientBasis { tensors, fd_step: self.fd_step },
        ))
    }

    /// Count of (valid, total) nodes in a block.
    pub fn validity_counts(&self, block: &ThetaBlock) -> (usize, usize) {
        let total = block.data.len() / FLOATS_PER_NODE;
        let valid = (0..total)
            .filter(|i| Self::node_is_valid(&block.data[i * FLOATS_PER_NODE..(i + 1) * FLOATS_PER_NODE]))
            .count();
        (valid, total)
    }
}

impl crate::actuation::FieldProvider for FieldLibrary {
    fn actuation(&self, p: &Vec3, theta: f64) -> Result<ActuationMatrix> {
        Ok(self.query(p, theta)?.0)
    }
    fn gradient_basis(&self, p: &Vec3, theta: f64) -> Result<GradientBasis> {
        Ok(self.query(p, theta)?.1)
    }
}

/// Evaluate A and 𝒢 at every grid node of every configured θ.
///
/// Nodes are computed in parallel but written in index order, so the result
/// is bit-identical to a sequential build. Domain failures mark the node
/// invalid instead of aborting.
pub fn build_library(
    assembly: &CoilAssembly,
    mechanism: &Mechanism,
    thetas: &[f64],
    grid: &LibraryGridSpec,
    meta: LibraryMeta,
) -> Result<FieldLibrary> {
    let mut sorted = thetas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let nx = grid.lateral_nodes();
    let ny = nx;
    let mut blocks = Vec::with_capacity(sorted.len());
    for &theta in &sorted {
        let z_limit = mechanism.z_limit(theta)?;
        let nz = grid.z_nodes(z_limit);
        let n_nodes = nx * ny * nz;
        let data: Vec<f64> = (0..n_nodes)
            .into_par_iter()
            .flat_map_iter(|idx| {
                let ix = idx % nx;
                let iy = (idx / nx) % ny;
                let iz = idx / (nx * ny);
                let p = Vec3::new(
                    -grid.x_half + ix as f64 * grid.step,
                    -grid.x_half + iy as f64 * grid.step,
                    grid.z_min + iz as f64 * grid.step,
                );
                let mut node = [f64::NAN; FLOATS_PER_NODE];
                node[9] = p.x;
                node[10] = p.y;
                node[11] = p.z;
                if let (Ok(a), Ok(g)) =
                    (assembly.actuation(&p, theta), assembly.gradients(&p, theta))
                {
                    for k in 0..3 {
                        node[3 * k] = a.columns[(0, k)];
                        node[3 * k + 1] = a.columns[(1, k)];
                        node[3 * k + 2] = a.columns[(2, k)];
                    }
                    for k in 0..3 {
                        for m in 0..3 {
                            for n in 0..3 {
                                node[12 + 9 * k + 3 * m + n] = g.tensors[k][(m, n)];
                            }
                        }
                    }
                }
                node.into_iter().collect::<Vec<f64>>()
            })
            .collect();
        blocks.push(ThetaBlock { theta, z_limit, nz, data });
    }
    Ok(FieldLibrary { grid: grid.clone(), fd_step: assembly.fd_step, blocks, meta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::field;
    use crate::coil::{CoilSpec, WindingQuadrature};

    fn small_library() -> FieldLibrary {
        let assembly = CoilAssembly::new(
            CoilSpec::default(),
            WindingQuadrature::default(),
            0.201,
            0.3,
            0.0015,
            0.0405,
            -0.18,
            0.0025,
        )
        .unwrap();
        let mech = Mechanism::default();
        let grid = LibraryGridSpec { x_half: 0.01, step: 0.005, z_min: -0.26 };
        build_library(
            &assembly,
            &mech,
            &[45f64.to_radians()],
            &grid,
            LibraryMeta::default(),
        )
        .unwrap()
    }

    #[test]
    fn node_values_match_pointwise_evaluation() {
        let lib = small_library();
        let assembly = CoilAssembly::new(
            CoilSpec::default(),
            WindingQuadrature::default(),
            0.201,
            0.3,
            0.0015,
            0.0405,
            -0.18,
            0.0025,
        )
        .unwrap();
        let theta = 45f64.to_radians();
        let block = &lib.blocks[0];
        assert_eq!(block.data.len(), 5 * 5 * block.nz * FLOATS_PER_NODE);
        let node = lib.node(block, 2, 1, 3);
        let p = Vec3::new(lib.axis_coord(2), lib.axis_coord(1), lib.z_coord(3));
        assert_eq!(&node[9..12], &[p.x, p.y, p.z]);
        let a = assembly.actuation(&p, theta).unwrap();
        assert_eq!(node[0], a.columns[(0, 0)]);
        assert_eq!(node[5], a.columns[(2, 1)]);
        let g = assembly.gradients(&p, theta).unwrap();
        assert_eq!(node[12], g.tensors[0][(0, 0)]);
        assert_eq!(node[12 + 9 + 3 * 1 + 2], g.tensors[1][(1, 2)]);
        // Query exactly at the node returns the stored entries.
        let (aq, gq) = lib.query(&p, theta).unwrap();
        assert_eq!(aq.columns, a.columns);
        assert_eq!(gq.tensors[2], g.tensors[2]);
    }

    #[test]
    fn cell_center_query_matches_direct_computation() {
        let lib = small_library();
        let assembly = CoilAssembly::new(
            CoilSpec::default(),
            WindingQuadrature::default(),
            0.201,
            0.3,
            0.0015,
            0.0405,
            -0.18,
            0.0025,
        )
        .unwrap();
        let theta = 45f64.to_radians();
        let p = Vec3::new(0.0025, -0.0025, -0.24125);
        let (aq, gq) = lib.query(&p, theta).unwrap();
        let a = assembly.actuation(&p, theta).unwrap();
        let g = assembly.gradients(&p, theta).unwrap();
        assert!((aq.columns - a.columns).norm() < 0.01 * a.columns.norm());
        for k in 0..3 {
            assert!((gq.tensors[k] - g.tensors[k]).norm() < 0.01 * g.tensors[k].norm());
        }
        let i = Vec3::new(1.0, 2.0, -1.0);
        let bq = field(&aq, &i);
        let bd = field(&a, &i);
        assert!((bq - bd).norm() < 0.01 * bd.norm());
    }

    #[test]
    fn unknown_theta_lists_available_values() {
        let lib = small_library();
        match lib.query(&Vec3::new(0.0, 0.0, -0.25), 40f64.to_radians()) {
            Err(Error::UnknownTheta { available, theta_deg }) => {
                assert!((theta_deg - 40.0).abs() < 1e-9);
                assert_eq!(available.len(), 1);
                assert!((available[0] - 45.0).abs() < 1e-6);
            }
            other => panic!("expected UnknownTheta, got {other:?}"),
        }
    }

    #[test]
    fn out_of_hull_query_is_rejected() {
        let lib = small_library();
        assert!(matches!(
            lib.query(&Vec3::new(0.02, 0.0, -0.25), 45f64.to_radians()),
            Err(Error::OutsideLibrary { .. })
        ));
        // Above z_limit(45°) ≈ -0.188: outside.
        assert!(matches!(
            lib.query(&Vec3::new(0.0, 0.0, -0.15), 45f64.to_radians()),
            Err(Error::OutsideLibrary { .. })
        ));
    }

    #[test]
    fn grid_respects_z_limit() {
        let lib = small_library();
        let block = &lib.blocks[0];
        let top = lib.z_coord(block.nz - 1);
        assert!(top <= block.z_limit + 1e-12);
        assert!(top + lib.grid.step > block.z_limit);
    }

    #[test]
    fn rebuild_is_bit_identical() {
        let a = small_library();
        let b = small_library();
        assert_eq!(a.blocks[0].data, b.blocks[0].data);
    }
}
