//! Network interchange documents.
//!
//! ```json
//! {"meta": {...}, "metrics": {...}, "budget": {...},
//!  "layers": [{"weights": [[...], ...], "bias": [...]}, ...]}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! read-write cycle reproduces every double bit for bit. `metrics` and
//! `budget` are informational and ignored on input.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::constructors::{BoundBudget, Construction, ConstructionRecord};
use crate::error::{Error, Result};
use crate::fnn::{Fnn, Layer, NetworkMetrics};
use crate::matrix::Matrix;

struct Rows<'a>(&'a Matrix);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.rows()))?;
        for r in self.0.iter_rows() {
            seq.serialize_element(r)?;
        }
        // Zero-width matrices still have rows.
        for _ in 0..if self.0.cols() == 0 { self.0.rows() } else { 0 } {
            seq.serialize_element(&[] as &[f64])?;
        }
        seq.end()
    }
}

struct LayerDoc<'a>(&'a Layer);

impl Serialize for LayerDoc<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("weights", &Rows(self.0.weights()))?;
        map.serialize_entry("bias", self.0.bias())?;
        map.end()
    }
}

struct Layers<'a>(&'a [Layer]);

impl Serialize for Layers<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(LayerDoc))
    }
}

#[derive(Serialize)]
struct DocOut<'a> {
    meta: &'a ConstructionRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    metrics: Option<NetworkMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<BoundBudget>,
    layers: Layers<'a>,
}

#[derive(Deserialize)]
struct LayerIn {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Deserialize)]
struct DocIn {
    meta: ConstructionRecord,
    layers: Vec<LayerIn>,
}

/// Writes `c` with its metrics and (when available) its budget.
pub fn write_network<W: Write>(w: W, c: &Construction) -> Result<()> {
    let doc = DocOut {
        meta: &c.record,
        metrics: Some(c.fnn.metrics()),
        budget: c.record.budget().ok(),
        layers: Layers(c.fnn.layers()),
    };
    let mut w = BufWriter::new(w);
    serde_json::to_writer(&mut w, &doc)?;
    w.flush()?;
    Ok(())
}

pub fn read_network<R: Read>(r: R) -> Result<Construction> {
    let doc: DocIn = serde_json::from_reader(BufReader::new(r))?;
    let layers = doc
        .layers
        .into_iter()
        .enumerate()
        .map(|(k, l)| {
            let cols = l.weights.first().map_or(0, Vec::len);
            if let Some(bad) = l.weights.iter().find(|row| row.len() != cols) {
                return Err(Error::DimensionMismatch {
                    at: k + 1,
                    expected: cols,
                    found: bad.len(),
                });
            }
            Ok(Layer::new(Matrix::from_rows(&l.weights)?, l.bias))
        })
        .collect::<Result<Vec<_>>>()?;
    let fnn = Fnn::new(layers)?;
    let rec = &doc.meta;
    if fnn.input_dim() != rec.input_dim() || fnn.output_dim() != rec.output_dim() {
        return Err(Error::PackingMismatch(format!(
            "{} record expects {} -> {}, network is {} -> {}",
            rec.kind,
            rec.input_dim(),
            rec.output_dim(),
            fnn.input_dim(),
            fnn.output_dim()
        )));
    }
    Ok(Construction {
        fnn,
        record: doc.meta,
    })
}

pub fn save_network(path: &Path, c: &Construction) -> Result<()> {
    write_network(File::create(path)?, c)
}

pub fn load_network(path: &Path) -> Result<Construction> {
    read_network(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{NetKind, ProductParams};

    #[test]
    fn round_trip_is_bit_exact() {
        let c = ProductParams::new(NetKind::ScalarProduct, 1, 1, 0.3, 0.01)
            .build()
            .unwrap();
        let mut buf = Vec::new();
        write_network(&mut buf, &c).unwrap();
        let back = read_network(&buf[..]).unwrap();
        assert_eq!(back, c);
        let mut again = Vec::new();
        write_network(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let c = ProductParams::new(NetKind::Square, 1, 1, 1.0, 0.1).build().unwrap();
        let mut buf = Vec::new();
        write_network(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let ragged = text.replacen("[[1.0],[1.0]", "[[1.0,2.0],[1.0]", 1);
        assert!(read_network(ragged.as_bytes()).is_err());
        let wrong_kind = text.replacen("\"square\"", "\"scalar_product\"", 1);
        assert!(matches!(
            read_network(wrong_kind.as_bytes()),
            Err(Error::PackingMismatch(_))
        ));
    }
}
