//! Projective camera/projector models, least-squares calibration, and
//! per-pixel triangulation.
//!
//! Both devices follow the pinhole model with the combined 3×4 projection
//! matrix normalized so that its last entry is 1. The camera keeps the
//! remaining 11 parameters; the projector only ever uses its row
//! coordinate, so rows two and three of its matrix (7 parameters) suffice.
//! Calibration stacks one design row per observed equation and solves the
//! overdetermined linear system; a camera pixel plus a projector row then
//! pin a world point through a 3×3 linear system.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Division guard for the projective depth denominator.
pub const EPSILON_DEPTH: f64 = 1e-9;

/// A design matrix is rank deficient when `σ_min < RANK_RATIO * σ_max`.
pub const RANK_RATIO: f64 = 1e-10;

/// Triangulation refuses systems with condition number above this.
pub const TRIANGULATION_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("TooFewPoints: {got} correspondences, {needed} required")]
    TooFewPoints { got: usize, needed: usize },
    #[error("RankDeficient: design matrix singular value ratio {ratio:.3e}")]
    RankDeficient { ratio: f64 },
    #[error("DivisionByZeroDepth: projective depth {depth:.3e}")]
    DivisionByZeroDepth { depth: f64 },
    #[error("SingularSystem: triangulation condition number {cond:.3e}")]
    SingularSystem { cond: f64 },
    #[error("NonFinite: {0} contains a non-finite value")]
    NonFinite(&'static str),
    #[error("DegenerateMatrix: cannot normalize, |m34| = {m34:.3e}")]
    DegenerateMatrix { m34: f64 },
    #[error("SolveFailed: {0}")]
    SolveFailed(&'static str),
}

/// A point in world coordinates (millimeters by convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WorldPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

/// A (sub-pixel) camera image coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPixel {
    pub x: f64,
    pub y: f64,
}

impl CameraPixel {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A (sub-pixel) projector row coordinate. Only the row is ever used for
/// measurement because the pattern varies along the vertical axis only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectorRow(pub f64);

/// The 11 parameters `[m11..m14, m21..m24, m31..m33]` of the normalized
/// world→camera projection (implied `m34 = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraProjection {
    params: [f64; 11],
}

impl CameraProjection {
    pub fn new(params: [f64; 11]) -> Result<Self, GeometryError> {
        if params.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("camera projection"));
        }
        Ok(Self { params })
    }

    /// Builds from a full 3×4 matrix by dividing through by `m34`.
    pub fn from_rows(rows: [[f64; 4]; 3]) -> Result<Self, GeometryError> {
        let m34 = rows[2][3];
        if m34.abs() < EPSILON_DEPTH {
            return Err(GeometryError::DegenerateMatrix { m34 });
        }
        let mut p = [0.0; 11];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let k = i * 4 + j;
                if k < 11 {
                    p[k] = v / m34;
                }
            }
        }
        Self::new(p)
    }

    pub fn params(&self) -> &[f64; 11] {
        &self.params
    }

    fn m(&self, i: usize, j: usize) -> f64 {
        debug_assert!((1..=3).contains(&i) && (1..=4).contains(&j));
        let k = (i - 1) * 4 + (j - 1);
        if k == 11 {
            1.0
        } else {
            self.params[k]
        }
    }
}

/// The 7 parameters `[m21..m24, m31..m33]` of the normalized
/// world→projector projection (row one is never used, implied `m34 = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorProjection {
    params: [f64; 7],
}

impl ProjectorProjection {
    pub fn new(params: [f64; 7]) -> Result<Self, GeometryError> {
        if params.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite("projector projection"));
        }
        Ok(Self { params })
    }

    /// Builds from rows two and three of a full 3×4 matrix, divided by `m34`.
    pub fn from_rows(row2: [f64; 4], row3: [f64; 4]) -> Result<Self, GeometryError> {
        let m34 = row3[3];
        if m34.abs() < EPSILON_DEPTH {
            return Err(GeometryError::DegenerateMatrix { m34 });
        }
        let p = [
            row2[0] / m34,
            row2[1] / m34,
            row2[2] / m34,
            row2[3] / m34,
            row3[0] / m34,
            row3[1] / m34,
            row3[2] / m34,
        ];
        Self::new(p)
    }

    pub fn params(&self) -> &[f64; 7] {
        &self.params
    }

    /// `m2j` for j in 1..=4.
    fn m2(&self, j: usize) -> f64 {
        self.params[j - 1]
    }

    /// `m3j` for j in 1..=3 (`m34 = 1`).
    fn m3(&self, j: usize) -> f64 {
        self.params[3 + j]
    }
}

/// One calibration record. `row` is absent for camera-only data sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub world: WorldPoint,
    pub pixel: CameraPixel,
    pub row: Option<ProjectorRow>,
}

/// A set of calibration records.
///
/// The camera solve needs at least 6 records (two equations each, 11
/// unknowns); the projector solve needs at least 7 records carrying a
/// projector row (one equation each, 7 unknowns).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrespondenceSet {
    pub records: Vec<Correspondence>,
}

impl CorrespondenceSet {
    pub fn new(records: Vec<Correspondence>) -> Self {
        Self { records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn with_rows(&self) -> impl Iterator<Item = (&Correspondence, f64)> {
        self.records.iter().filter_map(|c| c.row.map(|r| (c, r.0)))
    }
}

/// Solution of one least-squares calibration solve: the recovered
/// parameters together with the 2-norm of the stacked residual.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraSolve {
    pub projection: CameraProjection,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorSolve {
    pub projection: ProjectorProjection,
    pub residual: f64,
}

/// The two design rows and targets contributed by one camera observation.
///
/// Row one carries the x-equation, row two the y-equation:
/// `[X, Y, Z, 1, 0, 0, 0, 0, -x·X, -x·Y, -x·Z] θ = x` and
/// `[0, 0, 0, 0, X, Y, Z, 1, -y·X, -y·Y, -y·Z] θ = y`.
pub fn camera_design_rows(p: WorldPoint, q: CameraPixel) -> ([[f64; 11]; 2], [f64; 2]) {
    let (xw, yw, zw) = (p.x, p.y, p.z);
    let row1 = [
        xw,
        yw,
        zw,
        1.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -q.x * xw,
        -q.x * yw,
        -q.x * zw,
    ];
    let row2 = [
        0.0,
        0.0,
        0.0,
        0.0,
        xw,
        yw,
        zw,
        1.0,
        -q.y * xw,
        -q.y * yw,
        -q.y * zw,
    ];
    ([row1, row2], [q.x, q.y])
}

/// The single design row and target contributed by one projector
/// observation: `[X, Y, Z, 1, -y_p·X, -y_p·Y, -y_p·Z] θ = y_p`.
pub fn projector_design_row(p: WorldPoint, row: ProjectorRow) -> ([f64; 7], f64) {
    let (xw, yw, zw) = (p.x, p.y, p.z);
    let yp = row.0;
    (
        [xw, yw, zw, 1.0, -yp * xw, -yp * yw, -yp * zw],
        yp,
    )
}

fn solve_stacked(
    design: DMatrix<f64>,
    targets: DVector<f64>,
) -> Result<(DVector<f64>, f64), GeometryError> {
    let singular_values = design.clone().singular_values();
    let smax = singular_values.max();
    let smin = singular_values.min();
    if !(smax.is_finite() && smin.is_finite()) || smin < RANK_RATIO * smax {
        return Err(GeometryError::RankDeficient {
            ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        });
    }
    // Householder QR on the full-rank stacked system.
    let ncols = design.ncols();
    let qr = design.clone().qr();
    let qtb = qr.q().transpose() * &targets;
    let theta = qr
        .r()
        .solve_upper_triangular(&qtb.rows(0, ncols).clone_owned())
        .ok_or(GeometryError::SolveFailed("triangular back-substitution"))?;
    let residual = (&design * &theta - &targets).norm();
    Ok((theta, residual))
}

/// Least-squares camera calibration from world/pixel correspondences.
///
/// The stacked system is solved through an SVD of the design matrix, not
/// through the normal equations, so the conditioning of the problem is not
/// squared along the way.
pub fn solve_camera(set: &CorrespondenceSet) -> Result<CameraSolve, GeometryError> {
    let n = set.len();
    if n < 6 {
        return Err(GeometryError::TooFewPoints { got: n, needed: 6 });
    }
    let mut design = DMatrix::zeros(2 * n, 11);
    let mut targets = DVector::zeros(2 * n);
    for (i, c) in set.records.iter().enumerate() {
        let (rows, ys) = camera_design_rows(c.world, c.pixel);
        for (k, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                design[(2 * i + k, j)] = *v;
            }
            targets[2 * i + k] = ys[k];
        }
    }
    let (theta, residual) = solve_stacked(design, targets)?;
    let mut params = [0.0; 11];
    params.copy_from_slice(theta.as_slice());
    Ok(CameraSolve {
        projection: CameraProjection::new(params)?,
        residual,
    })
}

/// Least-squares projector calibration from world/row correspondences.
/// Records without a projector row are ignored.
pub fn solve_projector(set: &CorrespondenceSet) -> Result<ProjectorSolve, GeometryError> {
    let rows: Vec<_> = set.with_rows().collect();
    let n = rows.len();
    if n < 7 {
        return Err(GeometryError::TooFewPoints { got: n, needed: 7 });
    }
    let mut design = DMatrix::zeros(n, 7);
    let mut targets = DVector::zeros(n);
    for (i, (c, yp)) in rows.iter().enumerate() {
        let (row, y) = projector_design_row(c.world, ProjectorRow(*yp));
        for (j, v) in row.iter().enumerate() {
            design[(i, j)] = *v;
        }
        targets[i] = y;
    }
    let (theta, residual) = solve_stacked(design, targets)?;
    let mut params = [0.0; 7];
    params.copy_from_slice(theta.as_slice());
    Ok(ProjectorSolve {
        projection: ProjectorProjection::new(params)?,
        residual,
    })
}

/// Projects a world point into the camera image.
pub fn project_camera(
    theta: &CameraProjection,
    p: WorldPoint,
) -> Result<CameraPixel, GeometryError> {
    let depth = theta.m(3, 1) * p.x + theta.m(3, 2) * p.y + theta.m(3, 3) * p.z + 1.0;
    if depth.abs() < EPSILON_DEPTH {
        return Err(GeometryError::DivisionByZeroDepth { depth });
    }
    let x = (theta.m(1, 1) * p.x + theta.m(1, 2) * p.y + theta.m(1, 3) * p.z + theta.m(1, 4))
        / depth;
    let y = (theta.m(2, 1) * p.x + theta.m(2, 2) * p.y + theta.m(2, 3) * p.z + theta.m(2, 4))
        / depth;
    Ok(CameraPixel::new(x, y))
}

/// Projects a world point to its projector row.
pub fn project_projector(
    theta: &ProjectorProjection,
    p: WorldPoint,
) -> Result<ProjectorRow, GeometryError> {
    let depth = theta.m3(1) * p.x + theta.m3(2) * p.y + theta.m3(3) * p.z + 1.0;
    if depth.abs() < EPSILON_DEPTH {
        return Err(GeometryError::DivisionByZeroDepth { depth });
    }
    let y = (theta.m2(1) * p.x + theta.m2(2) * p.y + theta.m2(3) * p.z + theta.m2(4)) / depth;
    Ok(ProjectorRow(y))
}

/// Recovers the world point seen at camera pixel `(x_c, y_c)` and projector
/// row `y_p` by solving the 3×3 system `H · p = b` with
///
/// ```text
/// H = | m11_c - x_c m31_c   m12_c - x_c m32_c   m13_c - x_c m33_c |      | x_c - m14_c |
///     | m21_c - y_c m31_c   m22_c - y_c m32_c   m23_c - y_c m33_c |, b = | y_c - m24_c |
///     | m21_p - y_p m31_p   m22_p - y_p m32_p   m23_p - y_p m33_p |      | y_p - m24_p |
/// ```
///
/// Row three comes from the projector row equation expressed in the 7
/// available projector parameters.
pub fn triangulate(
    tc: &CameraProjection,
    tp: &ProjectorProjection,
    pixel: CameraPixel,
    row: ProjectorRow,
) -> Result<WorldPoint, GeometryError> {
    let (xc, yc, yp) = (pixel.x, pixel.y, row.0);
    let h = Matrix3::new(
        tc.m(1, 1) - xc * tc.m(3, 1),
        tc.m(1, 2) - xc * tc.m(3, 2),
        tc.m(1, 3) - xc * tc.m(3, 3),
        tc.m(2, 1) - yc * tc.m(3, 1),
        tc.m(2, 2) - yc * tc.m(3, 2),
        tc.m(2, 3) - yc * tc.m(3, 3),
        tp.m2(1) - yp * tp.m3(1),
        tp.m2(2) - yp * tp.m3(2),
        tp.m2(3) - yp * tp.m3(3),
    );
    let b = Vector3::new(xc - tc.m(1, 4), yc - tc.m(2, 4), yp - tp.m2(4));
    let sv = h.singular_values();
    let smin = sv.min();
    let cond = if smin > 0.0 { sv.max() / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > TRIANGULATION_COND_LIMIT {
        return Err(GeometryError::SingularSystem { cond });
    }
    let sol = h
        .lu()
        .solve(&b)
        .ok_or(GeometryError::SingularSystem { cond })?;
    Ok(WorldPoint::new(sol[0], sol[1], sol[2]))
}

/// Condition number of the triangulation system at the given observation.
pub fn triangulation_condition(
    tc: &CameraProjection,
    tp: &ProjectorProjection,
    pixel: CameraPixel,
    row: ProjectorRow,
) -> f64 {
    let (xc, yc, yp) = (pixel.x, pixel.y, row.0);
    let h = Matrix3::new(
        tc.m(1, 1) - xc * tc.m(3, 1),
        tc.m(1, 2) - xc * tc.m(3, 2),
        tc.m(1, 3) - xc * tc.m(3, 3),
        tc.m(2, 1) - yc * tc.m(3, 1),
        tc.m(2, 2) - yc * tc.m(3, 2),
        tc.m(2, 3) - yc * tc.m(3, 3),
        tp.m2(1) - yp * tp.m3(1),
        tp.m2(2) - yp * tp.m3(2),
        tp.m2(3) - yp * tp.m3(3),
    );
    let sv = h.singular_values();
    let smin = sv.min();
    if smin > 0.0 {
        sv.max() / smin
    } else {
        f64::INFINITY
    }
}
