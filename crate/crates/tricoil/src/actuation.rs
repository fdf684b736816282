//! Actuation matrix A(p, θ) and per-coil gradient tensor basis.
//!
//! Column k of A is the mechanism-frame field of coil k at 1 A, obtained by
//! sampling the coil's axisymmetric unit-current map in its local cylindrical
//! coordinates and rotating the components back with the local radial unit
//! vector and the coil axis. The gradient basis 𝒢_k = ∇a_k is evaluated by
//! second-order central differences with step `fd_step`.

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use crate::coil::{build_field_map, uniform_grid, AxisymmetricFieldMap, CoilSpec, WindingQuadrature};
use crate::error::{Error, Result};
use crate::mechanism::{coil_poses, CoilPose};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// 3x3 map from coil currents to the field vector at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ActuationMatrix {
    /// Columns a₁, a₂, a₃ in T/A.
    pub columns: Mat3,
    /// Evaluation point, mechanism frame, m.
    pub position: Vec3,
    /// Coil polar angle, rad.
    pub theta: f64,
}

/// Per-coil field-gradient tensors at one point, T/(A·m).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBasis {
    pub tensors: [Mat3; 3],
    pub fd_step: f64,
}

/// Three coil currents with a feasibility label (‖i‖∞ ≤ I_max).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentVector {
    pub values: Vec3,
    pub feasible: bool,
}

impl CurrentVector {
    pub fn max_abs(&self) -> f64 {
        self.values.amax()
    }
}

/// Local cylindrical coordinates of a point relative to one coil pose.
///
/// Returns (r_i, z_i, e_r): axial distance along the pose axis, radial
/// distance from it, and the radial unit vector. On the axis the pose's
/// fixed reference direction is returned (B_r = 0 there).
pub fn local_coords(p: &Vec3, pose: &CoilPose) -> (f64, f64, Vec3) {
    let d = p - pose.center;
    let z_i = d.dot(&pose.axis);
    let radial = d - pose.axis * z_i;
    let r_i = radial.norm();
    let e_r = if r_i > 1e-12 { radial / r_i } else { pose.e_r_ref };
    (r_i, z_i, e_r)
}

/// Assemble A(p, θ) from per-coil field maps and their poses.
pub fn actuation_matrix(
    p: &Vec3,
    theta: f64,
    maps: &[&AxisymmetricFieldMap; 3],
    poses: &[CoilPose; 3],
) -> Result<ActuationMatrix> {
    let mut columns = Mat3::zeros();
    for k in 0..3 {
        let (r_i, z_i, e_r) = local_coords(p, &poses[k]);
        let (b_r, b_z) = maps[k].sample(r_i, z_i).map_err(|e| match e {
            Error::OutsideFieldMap { r, z } => Error::CoilQueryOutOfDomain { coil: k, r, z },
            other => other,
        })?;
        let col = e_r * b_r + poses[k].axis * b_z;
        columns.set_column(k, &col);
    }
    Ok(ActuationMatrix { columns, position: *p, theta })
}

/// Central-difference gradient basis from per-column field evaluations.
///
/// (𝒢_k)_{mn} = [a_{k,m}(p + δ eₙ) - a_{k,m}(p - δ eₙ)] / (2δ).
pub fn gradient_basis_from_fn<F>(p: &Vec3, delta: f64, mut field_columns: F) -> Result<GradientBasis>
where
    F: FnMut(&Vec3) -> Result<Mat3>,
{
    let mut tensors = [Mat3::zeros(); 3];
    for n in 0..3 {
        let mut e = Vec3::zeros();
        e[n] = delta;
        let axis = [b'x', b'y', b'z'][n] as char;
        let plus = field_columns(&(p + e)).map_err(|_| Error::StencilOutOfDomain { axis, delta })?;
        let minus = field_columns(&(p - e)).map_err(|_| Error::StencilOutOfDomain { axis, delta })?;
        let diff = (plus - minus) / (2.0 * delta);
        for k in 0..3 {
            for m in 0..3 {
                tensors[k][(m, n)] = diff[(m, k)];
            }
        }
    }
    Ok(GradientBasis { tensors, fd_step: delta })
}

/// Gradient basis at (p, θ) from the interpolated coil maps.
pub fn gradient_basis(
    p: &Vec3,
    theta: f64,
    maps: &[&AxisymmetricFieldMap; 3],
    poses: &[CoilPose; 3],
    delta: f64,
) -> Result<GradientBasis> {
    gradient_basis_from_fn(p, delta, |q| Ok(actuation_matrix(q, theta, maps, poses)?.columns))
}

/// B = A·i.
pub fn field(a: &ActuationMatrix, currents: &Vec3) -> Vec3 {
    a.columns * currents
}

/// ∇B = Σ i_k 𝒢_k.
pub fn field_gradient(g: &GradientBasis, currents: &Vec3) -> Mat3 {
    g.tensors[0] * currents[0] + g.tensors[1] * currents[1] + g.tensors[2] * currents[2]
}

/// Relative singular-value cutoff for the least-norm pseudoinverse.
const SVD_CUTOFF: f64 = 1e-8;
/// Residual tolerance (relative to ‖B_target‖) above which the target is
/// declared unreachable.
const RESIDUAL_TOL: f64 = 1e-6;

/// Minimum-ℓ2-norm currents solving A·i = B_target, via SVD pseudoinverse.
///
/// The result is labeled infeasible (but still returned) when its max-norm
/// exceeds `i_max`; an out-of-range target direction is an error.
pub fn least_norm_currents(a: &ActuationMatrix, b_target: &Vec3, i_max: f64) -> Result<CurrentVector> {
    if b_target.norm() == 0.0 {
        return Ok(CurrentVector { values: Vec3::zeros(), feasible: true });
    }
    let svd = a.columns.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd.singular_values.max();
    let mut coeffs = u.transpose() * b_target;
    for j in 0..3 {
        let s = svd.singular_values[j];
        coeffs[j] = if s > SVD_CUTOFF * smax { coeffs[j] / s } else { 0.0 };
    }
    let i = v_t.transpose() * coeffs;
    let residual = (a.columns * i - b_target).norm();
    if residual > RESIDUAL_TOL * b_target.norm() {
        return Err(Error::UnreachableField { residual });
    }
    Ok(CurrentVector { values: i, feasible: i.amax() <= i_max })
}

/// The three identical coils, their maps, and the mount geometry: the direct
/// (non-library) evaluation path for A and 𝒢.
#[derive(Debug, Clone)]
pub struct CoilAssembly {
    pub spec: CoilSpec,
    pub quadrature: WindingQuadrature,
    pub maps: [Arc<AxisymmetricFieldMap>; 3],
    pub mount_radius: f64,
    pub mount_height: f64,
    pub fd_step: f64,
}

impl CoilAssembly {
    /// Build the shared unit-current map and wrap it for all three coils.
    pub fn new(
        spec: CoilSpec,
        quadrature: WindingQuadrature,
        r_max: f64,
        z_half: f64,
        map_step: f64,
        mount_radius: f64,
        mount_height: f64,
        fd_step: f64,
    ) -> Result<Self> {
        let nr = (r_max / map_step).round() as usize;
        let nz = (2.0 * z_half / map_step).round() as usize;
        let r_grid = uniform_grid(0.0, map_step, nr);
        let z_grid = uniform_grid(-z_half, map_step, nz);
        let map = Arc::new(build_field_map(&spec, &quadrature, &r_grid, &z_grid, true)?);
        Ok(CoilAssembly {
            spec,
            quadrature,
            maps: [map.clone(), map.clone(), map],
            mount_radius,
            mount_height,
            fd_step,
        })
    }

    pub fn poses(&self, theta: f64) -> [CoilPose; 3] {
        coil_poses(theta, self.mount_radius, self.mount_height)
    }

    pub fn map_refs(&self) -> [&AxisymmetricFieldMap; 3] {
        [&self.maps[0], &self.maps[1], &self.maps[2]]
    }

    pub fn actuation(&self, p: &Vec3, theta: f64) -> Result<ActuationMatrix> {
        actuation_matrix(p, theta, &self.map_refs(), &self.poses(theta))
    }

    pub fn gradients(&self, p: &Vec3, theta: f64) -> Result<GradientBasis> {
        gradient_basis(p, theta, &self.map_refs(), &self.poses(theta), self.fd_step)
    }

    /// Distance from a mechanism-frame point to the nearest winding.
    pub fn distance_to_windings(&self, p: &Vec3, theta: f64) -> f64 {
        self.poses(theta)
            .iter()
            .map(|pose| {
                let (r_i, z_i, _) = local_coords(p, pose);
                self.spec.distance_to_winding(r_i, z_i)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Common interface for the direct path and the interpolated library.
pub trait FieldProvider: Sync {
    fn actuation(&self, p: &Vec3, theta: f64) -> Result<ActuationMatrix>;
    fn gradient_basis(&self, p: &Vec3, theta: f64) -> Result<GradientBasis>;
}

impl FieldProvider for CoilAssembly {
    fn actuation(&self, p: &Vec3, theta: f64) -> Result<ActuationMatrix> {
        CoilAssembly::actuation(self, p, theta)
    }
    fn gradient_basis(&self, p: &Vec3, theta: f64) -> Result<GradientBasis> {
        self.gradients(p, theta)
    }
}
