//! Single-electromagnet field model.
//!
//! One coil is modeled as a stack of circular current loops distributed over
//! its rectangular winding cross-section. The loop field is the exact
//! Biot-Savart solution in terms of complete elliptic integrals, so the model
//! is air-core and strictly linear in current. For fast evaluation the field
//! at 1 A is tabulated on an (r, z) grid and interpolated bilinearly.
//!
//! Coordinates here are coil-local cylindrical: r is distance from the coil
//! axis, z runs along the axis with the winding centered at z = 0.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ellipe, ellipk, MU_0};

/// Physical description of one electromagnet.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CoilSpec {
    /// Inner winding radius, m.
    pub inner_radius: f64,
    /// Outer winding radius, m.
    pub outer_radius: f64,
    /// Axial winding length, m.
    pub axial_length: f64,
    /// Number of turns.
    pub turns: f64,
    /// Per-coil current limit, A.
    pub max_current: f64,
}

impl Default for CoilSpec {
    fn default() -> Self {
        CoilSpec {
            inner_radius: 0.015,
            outer_radius: 0.030,
            axial_length: 0.050,
            turns: 500.0,
            max_current: 5.0,
        }
    }
}

impl CoilSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.inner_radius > 0.0 && self.inner_radius <= self.outer_radius) {
            return Err(Error::InvalidParameter(format!(
                "coil radii: need 0 < inner <= outer, got {} / {}",
                self.inner_radius, self.outer_radius
            )));
        }
        if self.axial_length <= 0.0 {
            return Err(Error::InvalidParameter("axial_length must be > 0".into()));
        }
        if self.turns < 1.0 {
            return Err(Error::InvalidParameter("turns must be >= 1".into()));
        }
        if self.max_current <= 0.0 {
            return Err(Error::InvalidParameter("max_current must be > 0".into()));
        }
        Ok(())
    }

    /// True when the coil-local point lies inside the winding cross-section.
    pub fn inside_winding(&self, r: f64, z: f64) -> bool {
        r >= self.inner_radius && r <= self.outer_radius && z.abs() <= 0.5 * self.axial_length
    }

    /// Euclidean distance from a coil-local point to the winding
    /// cross-section rectangle (0 inside). Axisymmetry makes the planar
    /// distance in (r, z) equal to the 3-D distance to the winding solid.
    pub fn distance_to_winding(&self, r: f64, z: f64) -> f64 {
        let dr = if r < self.inner_radius {
            self.inner_radius - r
        } else if r > self.outer_radius {
            r - self.outer_radius
        } else {
            0.0
        };
        let dz = (z.abs() - 0.5 * self.axial_length).max(0.0);
        (dr * dr + dz * dz).sqrt()
    }
}

/// Midpoint-rule discretization of the winding volume into filament loops.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct WindingQuadrature {
    pub n_radial: usize,
    pub n_axial: usize,
}

impl Default for WindingQuadrature {
    fn default() -> Self {
        WindingQuadrature { n_radial: 8, n_axial: 16 }
    }
}

/// Field of a single circular current loop of radius `loop_radius` centered
/// at the origin with its axis along z. Returns (B_r, B_z) in tesla.
///
/// Off-axis components use the standard elliptic-integral solution with
/// k² = 4 R r / ((R+r)² + z²); on axis the closed form
/// B_z = μ₀ I R² / (2 (R² + z²)^{3/2}) applies and B_r = 0.
pub fn loop_field(loop_radius: f64, current: f64, r: f64, z: f64) -> Result<(f64, f64)> {
    if loop_radius <= 0.0 {
        return Err(Error::InvalidParameter("loop_radius must be > 0".into()));
    }
    if current == 0.0 {
        return Ok((0.0, 0.0));
    }
    if r < 1e-12 {
        let denom = (loop_radius * loop_radius + z * z).powf(1.5);
        return Ok((0.0, MU_0 * current * loop_radius * loop_radius / (2.0 * denom)));
    }
    let dr = r - loop_radius;
    let near2 = dr * dr + z * z;
    // Singular on the conductor itself.
    if near2 < 1e-24 {
        return Err(Error::OnConductor);
    }
    let q = (loop_radius + r) * (loop_radius + r) + z * z;
    let m = 4.0 * loop_radius * r / q;
    let k = ellipk(m);
    let e = ellipe(m);
    let den = dr * dr + z * z;
    let pref = MU_0 * current / (2.0 * std::f64::consts::PI * q.sqrt());
    let r2 = loop_radius * loop_radius;
    let bz = pref * (k + e * (r2 - r * r - z * z) / den);
    let br = pref * (z / r) * (e * (r2 + r * r + z * z) / den - k);
    Ok((br, bz))
}

/// Unit-current field of the whole coil at a coil-local point, in T/A.
///
/// Superposition of [`loop_field`] over the midpoint quadrature of the
/// winding cross-section, each filament carrying turns/(n_r·n_z) ampere-turns
/// per ampere of coil current.
pub fn coil_unit_field(spec: &CoilSpec, quad: &WindingQuadrature, r: f64, z: f64) -> Result<(f64, f64)> {
    if spec.inside_winding(r, z) {
        return Err(Error::InsideWinding { r, z });
    }
    let nr = quad.n_radial.max(1);
    let nz = quad.n_axial.max(1);
    let turn_current = spec.turns / (nr * nz) as f64;
    let dr = (spec.outer_radius - spec.inner_radius) / nr as f64;
    let dz = spec.axial_length / nz as f64;
    let mut br = 0.0;
    let mut bz = 0.0;
    for i in 0..nr {
        let loop_r = spec.inner_radius + (i as f64 + 0.5) * dr;
        for j in 0..nz {
            let loop_z = -0.5 * spec.axial_length + (j as f64 + 0.5) * dz;
            let (fr, fz) = loop_field(loop_r, turn_current, r, z - loop_z)?;
            br += fr;
            bz += fz;
        }
    }
    Ok((br, bz))
}

/// Per-coil unit-current (B_r, B_z) samples on a rectilinear (r, z) grid.
///
/// Nodes inside the winding cross-section are masked (stored as NaN) and any
/// interpolation touching a masked node is rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymmetricFieldMap {
    pub r_grid: Vec<f64>,
    pub z_grid: Vec<f64>,
    /// Row-major: index = ir * z_grid.len() + iz.
    pub b_r: Vec<f64>,
    pub b_z: Vec<f64>,
}

fn check_grid(name: &str, g: &[f64]) -> Result<()> {
    if g.len() < 2 {
        return Err(Error::InvalidGrid(format!("{name} grid needs >= 2 nodes")));
    }
    if !g.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidGrid(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Sample `coil_unit_field` at every grid node.
///
/// With `mask_winding` set, nodes inside the winding become NaN; otherwise any
/// overlap is an error.
pub fn build_field_map(
    spec: &CoilSpec,
    quad: &WindingQuadrature,
    r_grid: &[f64],
    z_grid: &[f64],
    mask_winding: bool,
) -> Result<AxisymmetricFieldMap> {
    spec.validate()?;
    check_grid("r", r_grid)?;
    check_grid("z", z_grid)?;
    if r_grid[0] < 0.0 {
        return Err(Error::InvalidGrid("r grid must be non-negative".into()));
    }
    if !mask_winding {
        for &r in r_grid {
            for &z in z_grid {
                if spec.inside_winding(r, z) {
                    return Err(Error::GridOverlapsWinding { r, z });
                }
            }
        }
    }
    let nz = z_grid.len();
    let samples: Vec<(f64, f64)> = (0..r_grid.len() * nz)
        .into_par_iter()
        .map(|idx| {
            let r = r_grid[idx / nz];
            let z = z_grid[idx % nz];
            if spec.inside_winding(r, z) {
                (f64::NAN, f64::NAN)
            } else {
                // Grid nodes never sit exactly on a filament (filaments are at
                // midpoints strictly inside the winding), so this cannot fail.
                coil_unit_field(spec, quad, r, z).expect("node outside winding")
            }
        })
        .collect();
    let (b_r, b_z) = samples.into_iter().unzip();
    Ok(AxisymmetricFieldMap { r_grid: r_grid.to_vec(), z_grid: z_grid.to_vec(), b_r, b_z })
}

/// Uniformly spaced grid from `start` to `start + n*step` inclusive of both ends.
pub fn uniform_grid(start: f64, step: f64, n_intervals: usize) -> Vec<f64> {
    (0..=n_intervals).map(|i| start + i as f64 * step).collect()
}

impl AxisymmetricFieldMap {
    fn bracket(grid: &[f64], x: f64) -> Option<usize> {
        if x < grid[0] || x > grid[grid.len() - 1] {
            return None;
        }
        // partition_point gives the first node > x; clamp to the last cell.
        let hi = grid.partition_point(|&g| g <= x).min(grid.len() - 1);
        Some(hi.max(1) - 1)
    }

    pub fn contains(&self, r: f64, z: f64) -> bool {
        r >= self.r_grid[0]
            && r <= self.r_grid[self.r_grid.len() - 1]
            && z >= self.z_grid[0]
            && z <= self.z_grid[self.z_grid.len() - 1]
    }

    /// Bilinear interpolation of (B_r, B_z) at a coil-local point, T/A.
    pub fn sample(&self, r: f64, z: f64) -> Result<(f64, f64)> {
        if r < 0.0 {
            return Err(Error::OutsideFieldMap { r, z });
        }
        let ir = Self::bracket(&self.r_grid, r).ok_or(Error::OutsideFieldMap { r, z })?;
        let iz = Self::bracket(&self.z_grid, z).ok_or(Error::OutsideFieldMap { r, z })?;
        let nz = self.z_grid.len();
        let idx = [ir * nz + iz, ir * nz + iz + 1, (ir + 1) * nz + iz, (ir + 1) * nz + iz + 1];
        for &i in &idx {
            if self.b_r[i].is_nan() || self.b_z[i].is_nan() {
                return Err(Error::MaskedCell { r, z });
            }
        }
        let tr = (r - self.r_grid[ir]) / (self.r_grid[ir + 1] - self.r_grid[ir]);
        let tz = (z - self.z_grid[iz]) / (self.z_grid[iz + 1] - self.z_grid[iz]);
        let lerp2 = |v: &[f64]| -> f64 {
            let v00 = v[idx[0]];
            let v01 = v[idx[1]];
            let v10 = v[idx[2]];
            let v11 = v[idx[3]];
            (1.0 - tr) * ((1.0 - tz) * v00 + tz * v01) + tr * ((1.0 - tz) * v10 + tz * v11)
        };
        Ok((lerp2(&self.b_r), lerp2(&self.b_z)))
    }
}
