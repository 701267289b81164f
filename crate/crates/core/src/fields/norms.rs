use super::{CellScalarField, FaceScalarField, FaceVectorField};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::operators::{jump_integrals, rt};
use crate::quadrature::square_rule;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    Lq(f64),
    Linf,
    BrokenH1,
    FvH1,
    JumpSeminorm,
}

#[derive(Debug, Clone, Copy)]
pub enum FieldRef<'a> {
    Cell(&'a CellScalarField),
    FaceScalar(&'a FaceScalarField),
    FaceVector(&'a FaceVectorField),
}

impl<'a> From<&'a CellScalarField> for FieldRef<'a> {
    fn from(f: &'a CellScalarField) -> Self {
        FieldRef::Cell(f)
    }
}

impl<'a> From<&'a FaceScalarField> for FieldRef<'a> {
    fn from(f: &'a FaceScalarField) -> Self {
        FieldRef::FaceScalar(f)
    }
}

impl<'a> From<&'a FaceVectorField> for FieldRef<'a> {
    fn from(f: &'a FaceVectorField) -> Self {
        FieldRef::FaceVector(f)
    }
}

impl FieldRef<'_> {
    fn name(&self) -> &'static str {
        match self {
            FieldRef::Cell(_) => "cell scalar",
            FieldRef::FaceScalar(_) => "face scalar",
            FieldRef::FaceVector(_) => "face vector",
        }
    }

    /// Pointwise magnitudes with the measure of their support.
    fn weighted(&self, mesh: &Mesh) -> Vec<(f64, f64)> {
        match self {
            FieldRef::Cell(f) => f.values.iter().zip(&mesh.cells).map(|(v, c)| (v.abs(), c.volume)).collect(),
            FieldRef::FaceScalar(f) => f.values.iter().zip(&mesh.dual_volumes).map(|(v, d)| (v.abs(), *d)).collect(),
            FieldRef::FaceVector(f) => {
                f.values.iter().zip(&mesh.dual_volumes).map(|(v, d)| (v[0].hypot(v[1]), *d)).collect()
            }
        }
    }
}

/// Discrete norm of `field` of the given kind.
pub fn norm<'a>(field: impl Into<FieldRef<'a>>, kind: NormKind, mesh: &Mesh) -> Result<f64> {
    let field = field.into();
    let unsupported = || Error::UnsupportedNorm { kind: format!("{kind:?}"), field: field.name() };
    match kind {
        NormKind::L2 => lq(&field.weighted(mesh), 2.0),
        NormKind::Lq(q) => lq(&field.weighted(mesh), q),
        NormKind::Linf => Ok(field.weighted(mesh).iter().map(|w| w.0).fold(0.0, f64::max)),
        NormKind::BrokenH1 => match field {
            FieldRef::FaceVector(u) => Ok(broken_h1(u, mesh).sqrt()),
            _ => Err(unsupported()),
        },
        NormKind::FvH1 => match field {
            FieldRef::FaceVector(u) => Ok(fv_h1(u, mesh).sqrt()),
            _ => Err(unsupported()),
        },
        NormKind::JumpSeminorm => match field {
            FieldRef::FaceVector(u) => {
                let j = jump_integrals(u, mesh);
                Ok(j.square.iter().zip(&mesh.faces).map(|(s, f)| s / f.length).sum::<f64>().sqrt())
            }
            _ => Err(unsupported()),
        },
    }
}

fn lq(w: &[(f64, f64)], q: f64) -> Result<f64> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lq norm needs 1 <= q < inf, got {q}")));
    }
    Ok(w.iter().map(|(v, m)| m * v.powf(q)).sum::<f64>().powf(1.0 / q))
}

fn broken_h1(u: &FaceVectorField, mesh: &Mesh) -> f64 {
    let rule = square_rule(3);
    let mut s = 0.0;
    for k in 0..mesh.n_cells() {
        let faces = mesh.cells[k].faces;
        for &(x, y, w) in &rule {
            let (g, det) = rt::physical_gradients(mesh, k, x, y);
            for c in 0..2 {
                let mut gu = [0.0; 2];
                for i in 0..4 {
                    gu[0] += u.values[faces[i]][c] * g[i][0];
                    gu[1] += u.values[faces[i]][c] * g[i][1];
                }
                s += w * det * (gu[0] * gu[0] + gu[1] * gu[1]);
            }
        }
    }
    s
}

fn fv_h1(u: &FaceVectorField, mesh: &Mesh) -> f64 {
    let mut s = 0.0;
    for cell in &mesh.cells {
        for &a in &cell.faces {
            for &b in &cell.faces {
                let d = [u.values[a][0] - u.values[b][0], u.values[a][1] - u.values[b][1]];
                s += d[0] * d[0] + d[1] * d[1];
            }
        }
    }
    s
}
