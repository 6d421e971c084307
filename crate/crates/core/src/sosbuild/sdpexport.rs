use std::fmt::Write;

use crate::sdpcore::{EntryRef, SdpProblem};

/// Render a block SDP in the documented sparse text format:
///
/// ```text
/// pmi-sdp v1
/// psd <index> <label> <dim>         (one line per PSD block)
/// free <index> <label> <len>        (one line per free block)
/// rows <m>
/// e <row> p <block> <i> <j> <value> (PSD entry, upper triangle, 0-based)
/// e <row> f <block> <k> 0 <value>   (free entry)
/// obj p|f <block> <i> <j> <value>
/// rhs <row> <value>                 (nonzero right-hand sides)
/// ```
///
/// Numbers print in shortest round-trip form; line order is deterministic,
/// so identical problems export byte-identically.
pub fn export_sdp_text(sdp: &SdpProblem) -> String {
    let mut out = String::new();
    out.push_str("pmi-sdp v1\n");
    for (i, (label, dim)) in sdp.psd_blocks.iter().enumerate() {
        writeln!(out, "psd {i} {label} {dim}").unwrap();
    }
    for (i, (label, len)) in sdp.free_blocks.iter().enumerate() {
        writeln!(out, "free {i} {label} {len}").unwrap();
    }
    writeln!(out, "rows {}", sdp.rows.len()).unwrap();
    for (r, row) in sdp.rows.iter().enumerate() {
        for (e, c) in &row.entries {
            match *e {
                EntryRef::Psd { block, i, j } => {
                    writeln!(out, "e {r} p {block} {i} {j} {c}").unwrap()
                }
                EntryRef::Free { block, k } => writeln!(out, "e {r} f {block} {k} 0 {c}").unwrap(),
            }
        }
    }
    for (e, c) in &sdp.objective {
        match *e {
            EntryRef::Psd { block, i, j } => writeln!(out, "obj p {block} {i} {j} {c}").unwrap(),
            EntryRef::Free { block, k } => writeln!(out, "obj f {block} {k} 0 {c}").unwrap(),
        }
    }
    for (r, row) in sdp.rows.iter().enumerate() {
        if row.rhs != 0.0 {
            writeln!(out, "rhs {r} {}", row.rhs).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdpcore::SparseRow;

    #[test]
    fn export_is_deterministic_and_complete() {
        let p = SdpProblem {
            psd_blocks: vec![("q".into(), 2)],
            free_blocks: vec![("g".into(), 1)],
            rows: vec![SparseRow {
                entries: vec![
                    (EntryRef::Psd { block: 0, i: 0, j: 1 }, 2.0),
                    (EntryRef::Free { block: 0, k: 0 }, -1.0),
                ],
                rhs: 0.5,
            }],
            objective: vec![(EntryRef::Free { block: 0, k: 0 }, -1.0)],
        };
        let a = export_sdp_text(&p);
        let b = export_sdp_text(&p);
        assert_eq!(a, b);
        assert!(a.starts_with("pmi-sdp v1\n"));
        assert!(a.contains("psd 0 q 2"));
        assert!(a.contains("free 0 g 1"));
        assert!(a.contains("e 0 p 0 0 1 2"));
        assert!(a.contains("e 0 f 0 0 0 -1"));
        assert!(a.contains("rhs 0 0.5"));
    }
}
