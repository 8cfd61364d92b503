//! Binary field snapshots.
//!
//! One ASCII header line
//! `CBY1 <mode> n=<n> L=<L> t=<t> fields=<comma list>[ w=<w> p_ref=<p_ref>]`
//! followed by every field as little-endian `f64`, x fastest, in header order.
//! Modes are `vacuum`, `fluid` and `eulerian`. The equation of state is
//! appended for fluid states and for Eulerian data that carries matter.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::frame_state::algebra::component_names;
use crate::frame_state::{Eos, GridState};
use crate::initial_data::{EulerianData, SYM_PAIRS};

pub const MAGIC: &str = "CBY1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("malformed snapshot at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
}

fn bad(offset: usize, message: impl Into<String>) -> SnapshotError {
    SnapshotError::Format { offset, message: message.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    State(GridState),
    Eulerian(EulerianData),
}

/// Metric and second fundamental form, then the pressure when `fluid`.
pub fn eulerian_field_names(fluid: bool) -> Vec<String> {
    let mut v: Vec<String> = SYM_PAIRS.iter().map(|(i, j)| format!("h{}{}", i + 1, j + 1)).collect();
    v.extend(SYM_PAIRS.iter().map(|(i, j)| format!("k{}{}", i + 1, j + 1)));
    if fluid {
        v.push("p".into());
    }
    v
}

fn header(mode: &str, n: usize, l: f64, t: f64, names: &[String], eos: Option<&Eos>) -> String {
    let mut h = format!("{MAGIC} {mode} n={n} L={l:?} t={t:?} fields={}", names.join(","));
    if let Some(e) = eos {
        h.push_str(&format!(" w={:?} p_ref={:?}", e.w, e.p_ref));
    }
    h.push('\n');
    h
}

fn encode(head: String, fields: &[&[f64]]) -> Vec<u8> {
    let mut out = head.into_bytes();
    out.reserve(fields.iter().map(|f| f.len() * 8).sum());
    for f in fields {
        for v in *f {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn encode_state(state: &GridState) -> Vec<u8> {
    let mode = if state.is_fluid() { "fluid" } else { "vacuum" };
    let head = header(mode, state.n, state.domain_length, state.t, &state.component_names(), state.eos());
    encode(head, &state.components())
}

pub fn encode_eulerian(data: &EulerianData) -> Vec<u8> {
    let fluid = data.eos.is_some();
    let head = header("eulerian", data.n, data.domain_length, 0.0, &eulerian_field_names(fluid), data.eos.as_ref());
    let mut fields: Vec<&[f64]> = data.h0.iter().chain(data.k.iter()).map(|v| v.as_slice()).collect();
    if fluid {
        fields.push(data.p0.as_slice());
    }
    encode(head, &fields)
}

pub fn write_snapshot(state: &GridState, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    Ok(fs::write(path, encode_state(state))?)
}

pub fn write_eulerian(data: &EulerianData, path: impl AsRef<Path>) -> Result<(), SnapshotError> {
    Ok(fs::write(path, encode_eulerian(data))?)
}

struct Header {
    mode: String,
    n: usize,
    l: f64,
    t: f64,
    fields: Vec<String>,
    fields_at: usize,
    eos: Option<Eos>,
    body: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, SnapshotError> {
    let end = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| bad(bytes.len(), "missing header newline"))?;
    let line = std::str::from_utf8(&bytes[..end]).map_err(|e| bad(e.valid_up_to(), "header is not UTF-8"))?;
    let mut tokens = Vec::new();
    let mut pos = 0;
    for tok in line.split(' ') {
        tokens.push((pos, tok));
        pos += tok.len() + 1;
    }
    let mut it = tokens.into_iter();
    match it.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(bad(0, format!("expected magic `{MAGIC}`"))),
    }
    let (mpos, mode) = it.next().ok_or_else(|| bad(end, "missing mode"))?;
    if !["vacuum", "fluid", "eulerian"].contains(&mode) {
        return Err(bad(mpos, format!("unknown mode `{mode}`")));
    }
    let mut kv = |key: &str| -> Result<(usize, &str), SnapshotError> {
        let (p, tok) = it.next().ok_or_else(|| bad(end, format!("missing `{key}=`")))?;
        tok.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(|v| (p, v))
            .ok_or_else(|| bad(p, format!("expected `{key}=`, got `{tok}`")))
    };
    let float = |(p, v): (usize, &str)| v.parse::<f64>().map_err(|_| bad(p, format!("bad number `{v}`")));
    let (np_, nv) = kv("n")?;
    let n: usize = nv.parse().map_err(|_| bad(np_, format!("bad grid size `{nv}`")))?;
    let l = float(kv("L")?)?;
    let t = float(kv("t")?)?;
    let (fields_at, fl) = kv("fields")?;
    let fields: Vec<String> = fl.split(',').map(str::to_string).collect();
    let wants_eos = mode == "fluid" || (mode == "eulerian" && line.contains(" w="));
    let eos = if wants_eos {
        let w = float(kv("w")?)?;
        let p_ref = float(kv("p_ref")?)?;
        Some(Eos { w, p_ref })
    } else {
        None
    };
    if let Some((p, tok)) = it.next() {
        return Err(bad(p, format!("unexpected header token `{tok}`")));
    }
    if n == 0 {
        return Err(bad(np_, "grid size must be positive"));
    }
    Ok(Header { mode: mode.into(), n, l, t, fields, fields_at, eos, body: end + 1 })
}

fn decode_fields(bytes: &[u8], h: &Header) -> Result<Vec<Vec<f64>>, SnapshotError> {
    let np = h.n.checked_pow(3).ok_or_else(|| bad(5, "grid size overflows"))?;
    let need = h.fields.len() * np * 8;
    let have = bytes.len() - h.body;
    if have != need {
        let at = h.body + have.min(need);
        return Err(bad(at, format!("expected {need} data bytes, found {have}")));
    }
    let data = &bytes[h.body..];
    Ok((0..h.fields.len())
        .map(|f| {
            data[f * np * 8..(f + 1) * np * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect()
        })
        .collect())
}

pub fn decode(bytes: &[u8]) -> Result<Snapshot, SnapshotError> {
    let h = parse_header(bytes)?;
    let expected = match h.mode.as_str() {
        "vacuum" => component_names(false),
        "fluid" => component_names(true),
        _ => eulerian_field_names(h.eos.is_some()),
    };
    if h.fields != expected {
        return Err(bad(h.fields_at, format!("field list does not match `{}` layout", h.mode)));
    }
    let mut fields = decode_fields(bytes, &h)?.into_iter();
    if h.mode == "eulerian" {
        let h0 = std::array::from_fn(|_| fields.next().unwrap());
        let k = std::array::from_fn(|_| fields.next().unwrap());
        let p0 = fields.next().unwrap_or_default();
        return Ok(Snapshot::Eulerian(EulerianData { n: h.n, domain_length: h.l, h0, k, p0, eos: h.eos }));
    }
    let mut state = GridState::minkowski(h.n, h.l);
    state.t = h.t;
    if let Some(eos) = h.eos {
        state = state.with_fluid(eos, vec![0.0; h.n * h.n * h.n]);
    }
    for (dst, src) in state.components_mut().into_iter().zip(fields) {
        dst.copy_from_slice(&src);
    }
    Ok(Snapshot::State(state))
}

pub fn read_any(path: impl AsRef<Path>) -> Result<Snapshot, SnapshotError> {
    decode(&fs::read(path)?)
}

/// Reads a vacuum or fluid state. Eulerian files are rejected.
pub fn read_snapshot(path: impl AsRef<Path>) -> Result<GridState, SnapshotError> {
    match read_any(path)? {
        Snapshot::State(s) => Ok(s),
        Snapshot::Eulerian(_) => Err(bad(5, "expected a vacuum or fluid state, found Eulerian data")),
    }
}
