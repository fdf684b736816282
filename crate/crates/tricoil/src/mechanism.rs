//! Planar PRRR four-bar kinematics of the coil tilt mechanism.
//!
//! A vertical slider at S = (0, s) drives joint B; the coupler BC closes onto
//! the rocker pivoted at the fixed point D. The coupler position C is the
//! upper intersection of the circles |C-B| = len_bc and |C-D| = len_cd. The
//! rocker direction ψ = atan2(C-D) fixes the coil link at φ = ψ + α, the
//! polar angle θ = |φ - π/2|, and the coil tip E = D + len_de·[cos φ, sin φ].
//!
//! All planar coordinates are in the cross-section plane P: x radially
//! outward from the symmetry axis, z vertical.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::rotation_z_120;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LinkageGeometry {
    /// Ground pivot of the rocker base link, plane-P coordinates, m.
    pub point_a: [f64; 2],
    /// Fixed rocker pivot, plane-P coordinates, m.
    pub point_d: [f64; 2],
    /// Coupler length |BC|, m.
    pub len_bc: f64,
    /// Rocker length |CD|, m.
    pub len_cd: f64,
    /// Coil link length |DE|, m.
    pub len_de: f64,
    /// Offset of joint B from the slider point S = (0, s), m.
    pub slider_offset_b: [f64; 2],
    /// Fixed coil-link offset α from the rocker, rad.
    pub alpha: f64,
    /// Slider travel [s_min, s_max], m.
    pub s_range: [f64; 2],
}

impl Default for LinkageGeometry {
    fn default() -> Self {
        LinkageGeometry {
            point_a: [0.060, 0.0],
            point_d: [0.060, 0.010],
            len_bc: 0.040,
            len_cd: 0.025,
            len_de: 0.055,
            slider_offset_b: [0.035, 0.0],
            alpha: std::f64::consts::FRAC_PI_3,
            s_range: [0.045, 0.067],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismState {
    pub s: f64,
    pub psi: f64,
    pub phi: f64,
    pub theta: f64,
    pub point_c: Vector2<f64>,
    pub point_e: Vector2<f64>,
}

impl LinkageGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("len_bc", self.len_bc), ("len_cd", self.len_cd), ("len_de", self.len_de)] {
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be > 0")));
            }
        }
        if self.s_range[1] <= self.s_range[0] {
            return Err(Error::InvalidParameter("s_range must be nonempty".into()));
        }
        // Solvability and strict monotonicity of theta(s) over the travel,
        // by dense sampling.
        let n = 400;
        let mut prev = forward_kinematics(self, self.s_range[0])?.theta;
        let mut dir = 0.0_f64;
        for i in 1..=n {
            let s = self.s_range[0] + (self.s_range[1] - self.s_range[0]) * i as f64 / n as f64;
            let th = forward_kinematics(self, s)?.theta;
            let d = th - prev;
            if d == 0.0 || (dir != 0.0 && d.signum() != dir) {
                return Err(Error::InvalidParameter(
                    "theta(s) is not strictly monotone over s_range".into(),
                ));
            }
            dir = d.signum();
            prev = th;
        }
        Ok(())
    }

    /// Attainable polar-angle interval over the travel range.
    pub fn theta_bounds(&self) -> Result<(f64, f64)> {
        let a = forward_kinematics(self, self.s_range[0])?.theta;
        let b = forward_kinematics(self, self.s_range[1])?.theta;
        Ok((a.min(b), a.max(b)))
    }
}

/// Solve the linkage position for slider travel `s`.
///
/// Branch choice: of the two circle intersections, the one with the larger z
/// (elbow-up) is taken; the geometry never switches branch inside `s_range`.
pub fn forward_kinematics(geom: &LinkageGeometry, s: f64) -> Result<MechanismState> {
    if s < geom.s_range[0] - 1e-12 || s > geom.s_range[1] + 1e-12 {
        return Err(Error::SliderOutOfRange { s, min: geom.s_range[0], max: geom.s_range[1] });
    }
    let b = Vector2::new(geom.slider_offset_b[0], s + geom.slider_offset_b[1]);
    let d = Vector2::new(geom.point_d[0], geom.point_d[1]);
    let bd = d - b;
    let dist = bd.norm();
    if dist < 1e-12
        || dist > geom.len_bc + geom.len_cd
        || dist < (geom.len_bc - geom.len_cd).abs()
    {
        return Err(Error::MechanismLocked { s });
    }
    // Circle-circle intersection: foot point along BD plus perpendicular offset.
    let along = (geom.len_bc * geom.len_bc - geom.len_cd * geom.len_cd + dist * dist) / (2.0 * dist);
    let h2 = geom.len_bc * geom.len_bc - along * along;
    if h2 < 0.0 {
        return Err(Error::MechanismLocked { s });
    }
    let h = h2.sqrt();
    let foot = b + bd * (along / dist);
    let perp = Vector2::new(-bd.y, bd.x) / dist;
    let c1 = foot + perp * h;
    let c2 = foot - perp * h;
    let c = if c1.y >= c2.y { c1 } else { c2 };

    let psi = (c.y - d.y).atan2(c.x - d.x);
    let phi = psi + geom.alpha;
    let theta = (phi - std::f64::consts::FRAC_PI_2).abs();
    let e = d + geom.len_de * Vector2::new(phi.cos(), phi.sin());
    Ok(MechanismState { s, psi, phi, theta, point_c: c, point_e: e })
}

/// Slider travel that realizes a target polar angle, by bisection on the
/// monotone branch. Converges to a 1e-10 m bracket.
pub fn inverse_kinematics(geom: &LinkageGeometry, theta: f64) -> Result<f64> {
    let (th_min, th_max) = geom.theta_bounds()?;
    if theta < th_min - 1e-12 || theta > th_max + 1e-12 {
        return Err(Error::ThetaUnreachable {
            theta_deg: theta.to_degrees(),
            min_deg: th_min.to_degrees(),
            max_deg: th_max.to_degrees(),
        });
    }
    let f_lo = forward_kinematics(geom, geom.s_range[0])?.theta;
    let increasing = forward_kinematics(geom, geom.s_range[1])?.theta > f_lo;
    let (mut lo, mut hi) = (geom.s_range[0], geom.s_range[1]);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let th = forward_kinematics(geom, mid)?.theta;
        if (th < theta) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One coil's rigid placement in the mechanism frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilPose {
    /// Coil center, m.
    pub center: Vector3<f64>,
    /// Unit axis direction, pointing from the coil toward the workspace
    /// (tilted inward by θ from -z).
    pub axis: Vector3<f64>,
    /// Reference radial direction used when a field point sits exactly on
    /// the coil axis (B_r vanishes there, so the choice is free but fixed).
    pub e_r_ref: Vector3<f64>,
    pub azimuth_index: usize,
}

/// The three coil poses at polar angle `theta`, coil centers on a circle of
/// `mount_radius` about the C3 axis at height `mount_height`.
///
/// Pose 0 sits at azimuth 0; poses 1 and 2 are produced by applying the exact
/// 120° rotation matrix, so the C3 symmetry holds to the last bit.
pub fn coil_poses(theta: f64, mount_radius: f64, mount_height: f64) -> [CoilPose; 3] {
    let (sin_t, cos_t) = theta.sin_cos();
    let center0 = Vector3::new(mount_radius, 0.0, mount_height);
    let axis0 = Vector3::new(-sin_t, 0.0, -cos_t);
    let e_r0 = Vector3::new(cos_t, 0.0, -sin_t);
    let rot = rotation_z_120();
    let mut poses = Vec::with_capacity(3);
    let (mut c, mut a, mut e) = (center0, axis0, e_r0);
    for k in 0..3 {
        poses.push(CoilPose { center: c, axis: a, e_r_ref: e, azimuth_index: k });
        c = rot * c;
        a = rot * a;
        e = rot * e;
    }
    [poses[0].clone(), poses[1].clone(), poses[2].clone()]
}

/// Anti-collision height-limit model: affine in the coil-tip height.
///
/// z_limit(θ) = z_ref - tip_scale · (E_z(θ_ref) - E_z(θ)). The tip drops as θ
/// grows, so z_limit is non-increasing in θ; tip_scale = 0 gives a constant
/// limit.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ClearanceModel {
    /// Admissible height at the reference angle, m.
    pub z_ref: f64,
    /// Reference polar angle, rad.
    pub theta_ref: f64,
    /// Sensitivity of the limit to coil-tip drop, dimensionless.
    pub tip_scale: f64,
}

impl Default for ClearanceModel {
    fn default() -> Self {
        // tip_scale calibrated so the default linkage gives
        // z_limit(35°) = -0.17 m and z_limit(55°) = -0.21 m.
        ClearanceModel { z_ref: -0.17, theta_ref: 35f64.to_radians(), tip_scale: 2.961419 }
    }
}

/// Linkage plus clearance model; the unit that owns θ-dependent geometry.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Mechanism {
    pub geometry: LinkageGeometry,
    pub clearance: ClearanceModel,
}

impl Default for Mechanism {
    fn default() -> Self {
        Mechanism { geometry: LinkageGeometry::default(), clearance: ClearanceModel::default() }
    }
}

impl Mechanism {
    /// Coil-tip height E_z at a given polar angle.
    pub fn tip_height(&self, theta: f64) -> Result<f64> {
        let s = inverse_kinematics(&self.geometry, theta)?;
        Ok(forward_kinematics(&self.geometry, s)?.point_e.y)
    }

    /// Maximum admissible workspace height (upper z bound of the
    /// anti-collision region) at polar angle `theta`.
    pub fn z_limit(&self, theta: f64) -> Result<f64> {
        let e_ref = self.tip_height(self.clearance.theta_ref)?;
        let e = self.tip_height(theta)?;
        Ok(self.clearance.z_ref - self.clearance.tip_scale * (e_ref - e))
    }
}
