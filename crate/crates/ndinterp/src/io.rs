//! Binary serialization of multi-dimensional tables (the NDIT format).
//!
//! The format carries data only — abscissas and ordinates, never compile
//! scratch — so a table written from any method stack loads under any
//! other: derivatives and partial integrals are recomputed by compile.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! header:   magic "NDIT" | version: u32 | dimensions: u32 | scalar width: u32 (= 8)
//! level:    count: i64, then `count` elements
//! element:  abscissa: f64, then the ordinate:
//!             - a nested level, for every dimension but the last
//!             - a single f64 at the innermost dimension
//! ```
//!
//! Negative counts, unknown magic/version/width and truncated streams
//! are rejected with the byte offset at which the problem was found.

use std::io::{Read, Write};

use crate::collection::Collection;
use crate::element::Distance;
use crate::error::{Error, Result};
use crate::multifunction::MultiFunction;
use crate::multimap::MultiMap;
use crate::value::Node;

pub const MAGIC: [u8; 4] = *b"NDIT";
pub const VERSION: u32 = 1;
pub const SCALAR_WIDTH: u32 = 8;
/// Header size in bytes: magic, version, dimension count, scalar width.
pub const HEADER_LEN: u64 = 16;

/// Upper bound on the capacity reserved from a count prefix before any
/// element has been read, so a corrupt count cannot exhaust memory.
const MAX_PREALLOC: usize = 1 << 20;

struct CountingWriter<W> {
    sink: W,
    offset: u64,
}

impl<W: Write> CountingWriter<W> {
    fn put(&mut self, bytes: &[u8]) -> Result<()> {
        self.sink.write_all(bytes).map_err(|e| Error::IoFormat {
            offset: self.offset,
            reason: format!("write failed: {e}"),
        })?;
        self.offset += bytes.len() as u64;
        Ok(())
    }

    fn put_f64(&mut self, value: f64) -> Result<()> {
        self.put(&value.to_le_bytes())
    }

    fn put_i64(&mut self, value: i64) -> Result<()> {
        self.put(&value.to_le_bytes())
    }

    fn put_u32(&mut self, value: u32) -> Result<()> {
        self.put(&value.to_le_bytes())
    }
}

struct CountingReader<R> {
    source: R,
    offset: u64,
}

impl<R: Read> CountingReader<R> {
    fn get<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.source
            .read_exact(&mut buf)
            .map_err(|e| Error::IoFormat {
                offset: self.offset,
                reason: format!("truncated stream reading {what}: {e}"),
            })?;
        self.offset += N as u64;
        Ok(buf)
    }

    fn get_f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.get::<8>(what)?))
    }

    fn get_i64(&mut self, what: &str) -> Result<i64> {
        Ok(i64::from_le_bytes(self.get::<8>(what)?))
    }

    fn get_u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.get::<4>(what)?))
    }
}

/// Serialize a multi-map to a byte sink.
pub fn write_table<W: Write>(map: &MultiMap, sink: W) -> Result<()> {
    let mut w = CountingWriter { sink, offset: 0 };
    w.put(&MAGIC)?;
    w.put_u32(VERSION)?;
    w.put_u32(map.dims() as u32)?;
    w.put_u32(SCALAR_WIDTH)?;
    write_node(&mut w, map.root())
}

/// Serialize the table behind a multi-function. Fails for a function
/// reduced all the way down to a bare constant, which has no table.
pub fn write_function<W: Write>(function: &MultiFunction, sink: W) -> Result<()> {
    let map = function.table().ok_or_else(|| Error::IoFormat {
        offset: 0,
        reason: "constant functional has no table to serialize".to_string(),
    })?;
    write_table(map, sink)
}

fn write_node<W: Write>(w: &mut CountingWriter<W>, node: &Node) -> Result<()> {
    match node {
        Node::Leaf(c) => {
            w.put_i64(c.len() as i64)?;
            for e in c.iter() {
                w.put_f64(e.x)?;
                w.put_f64(e.y)?;
            }
        }
        Node::Branch(c) => {
            w.put_i64(c.len() as i64)?;
            for e in c.iter() {
                w.put_f64(e.x)?;
                write_node(w, &e.y)?;
            }
        }
    }
    Ok(())
}

/// Deserialize a multi-map from a byte source, using the default metric.
pub fn read_table<R: Read>(source: R) -> Result<MultiMap> {
    read_table_with_metric(source, Distance::default())
}

pub fn read_table_with_metric<R: Read>(source: R, metric: Distance) -> Result<MultiMap> {
    let mut r = CountingReader { source, offset: 0 };
    let magic = r.get::<4>("magic")?;
    if magic != MAGIC {
        return Err(Error::IoFormat {
            offset: 0,
            reason: format!("bad magic {magic:?}, expected {MAGIC:?}"),
        });
    }
    let version = r.get_u32("version")?;
    if version != VERSION {
        return Err(Error::IoFormat {
            offset: 4,
            reason: format!("unsupported version {version}"),
        });
    }
    let dims = r.get_u32("dimension count")?;
    if dims == 0 {
        return Err(Error::IoFormat {
            offset: 8,
            reason: "dimension count must be at least 1".to_string(),
        });
    }
    let width = r.get_u32("scalar width")?;
    if width != SCALAR_WIDTH {
        return Err(Error::IoFormat {
            offset: 12,
            reason: format!("unsupported scalar width {width}"),
        });
    }
    let root = read_node(&mut r, dims as usize, metric)?;
    MultiMap::from_root(dims as usize, root, metric)
}

fn read_node<R: Read>(r: &mut CountingReader<R>, depth: usize, metric: Distance) -> Result<Node> {
    let count_offset = r.offset;
    let count = r.get_i64("element count")?;
    if count < 0 {
        return Err(Error::IoFormat {
            offset: count_offset,
            reason: format!("negative element count {count}"),
        });
    }
    let count = count as usize;
    let reserve = count.min(MAX_PREALLOC);
    if depth == 1 {
        let mut c = Collection::new(metric);
        c.reserve(reserve);
        let mut previous: Option<f64> = None;
        for _ in 0..count {
            let element_offset = r.offset;
            let x = r.get_f64("abscissa")?;
            let y = r.get_f64("ordinate")?;
            check_order(&metric, previous, x, element_offset)?;
            previous = Some(x);
            c.push_back(crate::element::IntegralElement {
                x,
                y,
                d: 0.0,
                v: 0.0,
            });
        }
        Ok(Node::Leaf(c))
    } else {
        let mut c = Collection::new(metric);
        c.reserve(reserve);
        let mut previous: Option<f64> = None;
        for _ in 0..count {
            let element_offset = r.offset;
            let x = r.get_f64("abscissa")?;
            let child = read_node(r, depth - 1, metric)?;
            check_order(&metric, previous, x, element_offset)?;
            previous = Some(x);
            c.push_back(crate::element::Element2D { x, y: child });
        }
        Ok(Node::Branch(c))
    }
}

fn check_order(metric: &Distance, previous: Option<f64>, x: f64, offset: u64) -> Result<()> {
    if let Some(p) = previous {
        if metric.distance(p, x) <= metric.precision() {
            return Err(Error::IoFormat {
                offset,
                reason: format!("abscissas out of order: {p} then {x}"),
            });
        }
    }
    Ok(())
}

/// Exact byte length of a map's serialized form.
pub fn encoded_len(map: &MultiMap) -> u64 {
    fn node_len(node: &Node) -> u64 {
        match node {
            Node::Leaf(c) => 8 + 16 * c.len() as u64,
            Node::Branch(c) => {
                8 + c.iter().map(|e| 8 + node_len(&e.y)).sum::<u64>()
            }
        }
    }
    HEADER_LEN + node_len(map.root())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collection::Axis;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn round_trip(map: &MultiMap) -> MultiMap {
        let mut bytes = Vec::new();
        write_table(map, &mut bytes).unwrap();
        assert_eq!(bytes.len() as u64, encoded_len(map));
        read_table(bytes.as_slice()).unwrap()
    }

    #[test]
    fn empty_map_is_header_plus_count() {
        let map = MultiMap::new(1);
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();
        assert_eq!(bytes.len() as u64, HEADER_LEN + 8);
        let back = round_trip(&map);
        assert_eq!(back.dims(), 1);
        assert_eq!(back.leaf_count(), 0);
    }

    #[test]
    fn scalar_elements_are_sixteen_bytes_each() {
        let mut map = MultiMap::new(1);
        for &x in &[0.0, 1.0, 2.0] {
            *map.insert(&[x]) = 10.0 * x;
        }
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();
        assert_eq!(bytes.len() as u64, HEADER_LEN + 8 + 3 * 16);
    }

    #[test]
    fn nested_map_byte_length_follows_format_rules() {
        // 2x2 map: header + outer count + 2 x (abscissa + inner count + 2 x 16).
        let mut map = MultiMap::new(2);
        for &x in &[0.0, 1.0] {
            for &y in &[0.0, 1.0] {
                *map.insert(&[x, y]) = x - y;
            }
        }
        let expected = HEADER_LEN + 8 + 2 * (8 + 8 + 2 * 16);
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();
        assert_eq!(bytes.len() as u64, expected);
    }

    #[test]
    fn random_round_trips_preserve_leaves_bit_exactly() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..100 {
            let dims = rng.gen_range(1..=4usize);
            let mut map = MultiMap::new(dims);
            let inserts = rng.gen_range(1..40);
            for _ in 0..inserts {
                let key: Vec<f64> = (0..dims).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let y = if rng.gen_bool(0.05) {
                    -0.0
                } else {
                    rng.gen_range(-1e6..1e6)
                };
                *map.insert(&key) = y;
            }
            let back = round_trip(&map);
            let a: Vec<(Vec<f64>, f64)> = map.leaves().map(|(k, v)| (k, *v)).collect();
            let b: Vec<(Vec<f64>, f64)> = back.leaves().map(|(k, v)| (k, *v)).collect();
            assert_eq!(a.len(), b.len());
            for ((ka, va), (kb, vb)) in a.iter().zip(&b) {
                assert_eq!(ka.len(), kb.len());
                for (xa, xb) in ka.iter().zip(kb) {
                    assert_eq!(xa.to_bits(), xb.to_bits());
                }
                assert_eq!(va.to_bits(), vb.to_bits());
            }
        }
    }

    #[test]
    fn truncated_stream_reports_offset_without_partial_table() {
        let mut map = MultiMap::new(2);
        map.configure(
            &[
                Axis::grid(3, 0.0, 1.0).unwrap(),
                Axis::grid(3, 0.0, 1.0).unwrap(),
            ],
            |k| k[0] * k[1],
        )
        .unwrap();
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();
        // Cut in the middle of an element.
        bytes.truncate(bytes.len() - 13);
        match read_table(bytes.as_slice()) {
            Err(Error::IoFormat { offset, reason }) => {
                assert!(offset > 0);
                assert!(reason.contains("truncated"), "{reason}");
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        let map = MultiMap::new(1);
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();

        let mut corrupt = bytes.clone();
        corrupt[0] = b'X';
        assert!(matches!(
            read_table(corrupt.as_slice()),
            Err(Error::IoFormat { offset: 0, .. })
        ));

        let mut newer = bytes.clone();
        newer[4..8].copy_from_slice(&9u32.to_le_bytes());
        assert!(matches!(
            read_table(newer.as_slice()),
            Err(Error::IoFormat { offset: 4, .. })
        ));
    }

    #[test]
    fn negative_count_is_rejected() {
        let map = MultiMap::new(1);
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();
        bytes[16..24].copy_from_slice(&(-1i64).to_le_bytes());
        match read_table(bytes.as_slice()) {
            Err(Error::IoFormat { offset: 16, reason }) => {
                assert!(reason.contains("negative"), "{reason}");
            }
            other => panic!("expected negative-count error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_order_abscissas_are_rejected() {
        let mut map = MultiMap::new(1);
        *map.insert(&[0.0]) = 1.0;
        *map.insert(&[1.0]) = 2.0;
        let mut bytes = Vec::new();
        write_table(&map, &mut bytes).unwrap();
        // Swap the two elements' abscissas.
        let first: [u8; 8] = bytes[24..32].try_into().unwrap();
        let second: [u8; 8] = bytes[40..48].try_into().unwrap();
        bytes[24..32].copy_from_slice(&second);
        bytes[40..48].copy_from_slice(&first);
        assert!(matches!(
            read_table(bytes.as_slice()),
            Err(Error::IoFormat { .. })
        ));
    }

    #[test]
    fn format_carries_data_only() {
        // The same data written from two builds is byte-identical
        // regardless of how lookups will later be performed.
        let mut a = MultiMap::new(1);
        a.configure(&[Axis::grid(5, 0.0, 1.0).unwrap()], |k| k[0] * 2.0)
            .unwrap();
        let mut b = MultiMap::new(1);
        for i in 0..5 {
            let x = i as f64 * 0.25;
            *b.insert(&[x]) = x * 2.0;
        }
        let mut bytes_a = Vec::new();
        let mut bytes_b = Vec::new();
        write_table(&a, &mut bytes_a).unwrap();
        write_table(&b, &mut bytes_b).unwrap();
        assert_eq!(bytes_a, bytes_b);
    }
}
