use anyhow::{Context, Result};
use monoblock::{Field, Mesh};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// `x,y,value` rows ordered by `j` then `i`.
pub fn field_csv(mesh: &Mesh, field: &Field) -> String {
    let mut s = String::from("x,y,value\n");
    for j in 0..=mesh.ny() {
        for i in 0..=mesh.nx() {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", mesh.x(i), mesh.y(j), field.get(i, j));
        }
    }
    s
}

pub fn write_csv(path: &Path, mesh: &Mesh, field: &Field) -> Result<()> {
    fs::write(path, field_csv(mesh, field)).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
