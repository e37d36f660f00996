//! JSON forms: `{"m": m, "weights": ...}` where `weights` is a list for color
//! measures, a row-major nested matrix for pair measures and kernels (a flat
//! list of `m²` numbers is also accepted), and a list of
//! `{"color", "ell", "mass"}` atoms for neighborhood measures.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ColorMeasure, DegreeVector, Kernel, NeighborhoodMeasure, PairMatrix, PairMeasure};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColorRepr {
    m: usize,
    weights: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixWeights {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Serialize)]
struct MatrixOut {
    m: usize,
    weights: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixIn {
    m: usize,
    weights: MatrixWeights,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Atom {
    color: usize,
    ell: DegreeVector,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NeighborhoodRepr {
    m: usize,
    weights: Vec<Atom>,
}

impl Serialize for ColorMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ColorRepr { m: self.alphabet.size(), weights: self.weights.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ColorMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = ColorRepr::deserialize(d)?;
        if r.weights.len() != r.m {
            return Err(D::Error::custom(format!("expected {} weights, got {}", r.m, r.weights.len())));
        }
        ColorMeasure::new(r.weights).map_err(D::Error::custom)
    }
}

fn matrix_from_repr(r: MatrixIn) -> crate::Result<PairMatrix> {
    match r.weights {
        MatrixWeights::Nested(rows) => {
            if rows.len() != r.m {
                return Err(crate::error::shape(format!("expected {} rows, got {}", r.m, rows.len())));
            }
            PairMatrix::from_rows(&rows)
        }
        MatrixWeights::Flat(flat) => PairMatrix::new(r.m, flat),
    }
}

impl Serialize for PairMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixOut { m: self.alphabet.size(), weights: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        matrix_from_repr(MatrixIn::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for PairMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        PairMeasure::from_matrix(PairMatrix::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for Kernel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Kernel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Kernel::from_matrix(PairMatrix::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for NeighborhoodMeasure {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let weights = self.iter().map(|(color, ell, mass)| Atom { color, ell: ell.clone(), mass }).collect();
        NeighborhoodRepr { m: self.alphabet.size(), weights }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NeighborhoodMeasure {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = NeighborhoodRepr::deserialize(d)?;
        NeighborhoodMeasure::new(r.m, r.weights.into_iter().map(|a| (a.color, a.ell, a.mass))).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips() {
        let mu = ColorMeasure::probability(vec![0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&mu).unwrap();
        assert_eq!(s, r#"{"m":2,"weights":[0.25,0.75]}"#);
        assert_eq!(serde_json::from_str::<ColorMeasure>(&s).unwrap(), mu);

        let k = Kernel::from_rows(&[vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"m":2,"weights":[[3.0,1.0],[1.0,2.0]]}"#);
        assert_eq!(serde_json::from_str::<Kernel>(&s).unwrap(), k);
        let flat: Kernel = serde_json::from_str(r#"{"m":2,"weights":[3,1,1,2]}"#).unwrap();
        assert_eq!(flat, k);

        let nu =
            NeighborhoodMeasure::new(2, [(0, DegreeVector::new(vec![1, 2]), 0.5), (1, DegreeVector::zeros(2), 0.5)])
                .unwrap();
        let s = serde_json::to_string(&nu).unwrap();
        assert_eq!(serde_json::from_str::<NeighborhoodMeasure>(&s).unwrap(), nu);
    }

    #[test]
    fn rejects_invalid() {
        assert!(serde_json::from_str::<Kernel>(r#"{"m":2,"weights":[[1,2],[3,1]]}"#).is_err());
        assert!(serde_json::from_str::<ColorMeasure>(r#"{"m":3,"weights":[1]}"#).is_err());
        assert!(serde_json::from_str::<PairMeasure>(r#"{"m":1,"weights":[[-1]]}"#).is_err());
        assert!(serde_json::from_str::<ColorMeasure>(r#"{"m":1,"weights":[1],"x":0}"#).is_err());
    }
}
