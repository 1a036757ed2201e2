//! Plain-text diagrams of comparator networks.
//!
//! One row per channel, channel 1 on top. Each comparator gets its own column:
//! `o` marks its two endpoints and `|` the channels it crosses. Layers are
//! separated by a `:` column, so an empty layer shows up as `:-:`.
//!
//! ```text
//! 1 ---o---:-o---:-----
//! 2 ---o---:-|-o-:-o---
//! 3 -----o-:-o-|-:-o---
//! 4 -----o-:---o-:-----
//! ```
//!
//! The format is parsed back by [`parse_ascii`], and the round trip is exact.

use crate::error::{Error, Result};
use crate::network::{Comparator, LayeredNetwork};

const LEAD: &str = "--";

pub fn render_ascii(net: &LayeredNetwork) -> String {
    let width = net.n().to_string().len();
    let mut out = String::new();
    for ch in 1..=net.n() {
        out.push_str(&format!("{ch:>width$} {LEAD}"));
        for (k, layer) in net.layers().iter().enumerate() {
            if k > 0 {
                out.push(':');
            }
            out.push('-');
            for c in layer {
                out.push(mark(*c, ch));
                out.push('-');
            }
        }
        out.push_str(LEAD);
        out.push('\n');
    }
    out
}

fn mark(c: Comparator, ch: usize) -> char {
    if c.touches(ch) {
        'o'
    } else if c.i() < ch && ch < c.j() {
        '|'
    } else {
        '-'
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidNetwork(format!("diagram: {}", msg.into()))
}

pub fn parse_ascii(text: &str) -> Result<LayeredNetwork> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
        let line = line.trim_start();
        let (label, wire) = line
            .split_once(' ')
            .ok_or_else(|| bad(format!("row {} has no channel label", idx + 1)))?;
        if label.parse::<usize>().ok() != Some(idx + 1) {
            return Err(bad(format!("expected channel label {}, found {label:?}", idx + 1)));
        }
        let wire = wire.trim_end();
        let core = wire
            .strip_prefix(LEAD)
            .and_then(|w| w.strip_suffix(LEAD))
            .ok_or_else(|| bad(format!("row {} must start and end with {LEAD}", idx + 1)))?;
        let groups: Vec<&[u8]> = if core.is_empty() {
            Vec::new()
        } else {
            core.split(':').map(str::as_bytes).collect()
        };
        rows.push(groups);
    }
    let n = rows.len();
    if n == 0 {
        return Err(bad("no channels"));
    }
    let depth = rows[0].len();
    let mut layers = Vec::with_capacity(depth);
    for k in 0..depth {
        let len = rows[0][k].len();
        if rows.iter().any(|r| r.len() != depth || r[k].len() != len) || len % 2 == 0 {
            return Err(bad(format!("layer {} is misaligned", k + 1)));
        }
        let mut layer = Vec::new();
        for col in (1..len).step_by(2) {
            let marks: Vec<u8> = rows.iter().map(|r| r[k][col]).collect();
            let ends: Vec<usize> = (0..n).filter(|&r| marks[r] == b'o').map(|r| r + 1).collect();
            let [i, j] = ends[..] else {
                return Err(bad(format!("layer {}: a column needs exactly two endpoints", k + 1)));
            };
            for (r, &m) in marks.iter().enumerate() {
                let ch = r + 1;
                let expected = if ch == i || ch == j {
                    b'o'
                } else if i < ch && ch < j {
                    b'|'
                } else {
                    b'-'
                };
                if m != expected {
                    return Err(bad(format!("layer {}: unexpected {:?} on channel {ch}", k + 1, m as char)));
                }
            }
            layer.push(Comparator::new(i, j)?);
        }
        if rows.iter().any(|r| r[k].iter().step_by(2).any(|&b| b != b'-')) {
            return Err(bad(format!("layer {}: spacing must be wire", k + 1)));
        }
        layers.push(layer);
    }
    LayeredNetwork::new(n, layers)
}
