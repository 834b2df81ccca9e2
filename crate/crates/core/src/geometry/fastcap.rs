//! FASTCAP generic panel format: a `0 <title>` line followed by
//! `Q <cond> x1 y1 z1 ... x4 y4 z4` lines with coordinates in metres.

use super::device::Vec3;
use super::mesh::{dot, norm, sub, Panel, PanelMesh};
use crate::error::{Error, Result};

/// nm to metres as a decimal exponent shift on the shortest round-trip
/// representation, so that import recovers every coordinate bit-exactly.
fn nm_to_m_text(v: f64) -> String {
    shift_exponent(&format!("{v:e}"), -9).expect("formatted float has an exponent")
}

fn shift_exponent(text: &str, by: i32) -> Option<String> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    Some(format!("{mantissa}e{}", exp + by))
}

fn m_text_to_nm(tok: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("invalid coordinate '{tok}'"));
    let shifted = shift_exponent(tok, 9).ok_or_else(bad)?;
    let v: f64 = shifted.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

pub fn export_panels(mesh: &PanelMesh) -> String {
    let mut out = String::from("0 dqdcap panel mesh\n");
    for p in &mesh.panels {
        out.push_str("Q ");
        out.push_str(&mesh.conductor_names[p.conductor]);
        for v in &p.vertices {
            for c in v {
                out.push(' ');
                out.push_str(&nm_to_m_text(*c));
            }
        }
        out.push('\n');
    }
    out
}

/// Parse generic-format text. Only quadrilateral panels that are
/// rectangles are accepted; conductors are numbered in order of first
/// appearance.
pub fn import_panels(text: &str) -> Result<PanelMesh> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim_start().starts_with('0') => {}
        _ => return Err(Error::Parse("missing '0' title line".into())),
    }
    let mut mesh = PanelMesh::default();
    for (n, line) in lines {
        let n = n + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let Some(&kind) = toks.first() else { continue };
        match kind {
            "*" => continue,
            k if k.starts_with('*') => continue,
            "Q" | "q" => {}
            "T" | "t" => {
                return Err(Error::Parse(format!("line {n}: triangular panels are not supported")))
            }
            other => return Err(Error::Parse(format!("line {n}: unknown record '{other}'"))),
        }
        if toks.len() != 14 {
            return Err(Error::Parse(format!(
                "line {n}: expected conductor name and 12 coordinates"
            )));
        }
        let name = toks[1];
        let conductor = match mesh.conductor_names.iter().position(|c| c == name) {
            Some(i) => i,
            None => {
                mesh.conductor_names.push(name.to_string());
                mesh.conductor_names.len() - 1
            }
        };
        let mut vertices = [[0.0; 3]; 4];
        for (k, tok) in toks[2..].iter().enumerate() {
            vertices[k / 3][k % 3] = m_text_to_nm(tok)
                .map_err(|e| Error::Parse(format!("line {n}: {e}")))?;
        }
        check_rectangle(&vertices).map_err(|m| Error::Parse(format!("line {n}: {m}")))?;
        mesh.panels.push(Panel { conductor, vertices });
    }
    Ok(mesh)
}

fn check_rectangle(v: &[Vec3; 4]) -> std::result::Result<(), String> {
    let u = sub(v[1], v[0]);
    let w = sub(v[3], v[0]);
    let (lu, lw) = (norm(u), norm(w));
    if lu == 0.0 || lw == 0.0 {
        return Err("degenerate panel".into());
    }
    let scale = lu.max(lw);
    let closure = sub(sub(v[2], v[1]), w);
    if norm(closure) > 1e-6 * scale || dot(u, w).abs() > 1e-6 * lu * lw {
        return Err("panel is not a rectangle".into());
    }
    Ok(())
}
