//! Plain-text mesh format.
//!
//! ```text
//! NODES n
//! id x y
//! ELEMENTS m
//! id kind n0 n1 n2 [n3]
//! NSET name k id...
//! POLYLINE name k id...      # closed chains use POLYLINE_CLOSED
//! ```
//! Tokens are whitespace separated; `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use super::{ElementKind, Mesh, Polyline};
use crate::error::{Error, Result};
use crate::geom::Vec2;

struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| {
                let l = l.split('#').next().unwrap_or("");
                l.split_whitespace().map(move |t| (i + 1, t))
            })
            .collect();
        Tokens { items, pos: 0 }
    }

    fn line(&self) -> usize {
        self.items
            .get(self.pos)
            .or(self.items.last())
            .map_or(0, |t| t.0)
    }

    fn next(&mut self) -> Option<&'a str> {
        let t = self.items.get(self.pos).map(|t| t.1);
        self.pos += 1;
        t
    }

    fn expect<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let line = self.line();
        let tok = self.next().ok_or(Error::Parse {
            line,
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("expected {what}, found '{tok}'"),
        })
    }
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut t = Tokens::new(text);
    let mut coords: Vec<Option<Vec2>> = Vec::new();
    let mut elems: Vec<Option<(ElementKind, Vec<usize>)>> = Vec::new();
    let mut mesh = Mesh::default();
    while let Some(kw) = t.next() {
        let line = t.items[t.pos - 1].0;
        match kw {
            "NODES" => {
                let n: usize = t.expect("node count")?;
                coords = vec![None; n];
                for _ in 0..n {
                    let l = t.line();
                    let id: usize = t.expect("node id")?;
                    let x: f64 = t.expect("x coordinate")?;
                    let y: f64 = t.expect("y coordinate")?;
                    let slot = coords.get_mut(id).ok_or(Error::Parse {
                        line: l,
                        msg: format!("node id {id} out of range"),
                    })?;
                    if slot.replace(Vec2::new(x, y)).is_some() {
                        return Err(Error::Parse {
                            line: l,
                            msg: format!("duplicate node id {id}"),
                        });
                    }
                }
            }
            "ELEMENTS" => {
                let m: usize = t.expect("element count")?;
                elems = vec![None; m];
                for _ in 0..m {
                    let l = t.line();
                    let id: usize = t.expect("element id")?;
                    let kind: ElementKind = t.expect::<String>("element kind")?.parse()?;
                    let mut nodes = Vec::with_capacity(kind.n_nodes());
                    for _ in 0..kind.n_nodes() {
                        nodes.push(t.expect("element node")?);
                    }
                    let slot = elems.get_mut(id).ok_or(Error::Parse {
                        line: l,
                        msg: format!("element id {id} out of range"),
                    })?;
                    if slot.replace((kind, nodes)).is_some() {
                        return Err(Error::Parse {
                            line: l,
                            msg: format!("duplicate element id {id}"),
                        });
                    }
                }
            }
            "NSET" | "POLYLINE" | "POLYLINE_CLOSED" => {
                let name: String = t.expect("set name")?;
                let k: usize = t.expect("id count")?;
                let ids = (0..k)
                    .map(|_| t.expect("node id"))
                    .collect::<Result<Vec<usize>>>()?;
                match kw {
                    "NSET" => {
                        mesh.node_sets.insert(name, ids);
                    }
                    "POLYLINE" => {
                        mesh.polylines.insert(name, Polyline::open(ids));
                    }
                    _ => {
                        mesh.polylines.insert(name, Polyline::closed(ids));
                    }
                }
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown keyword '{other}'"),
                })
            }
        }
    }
    let coords = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            c.ok_or(Error::Parse {
                line: 0,
                msg: format!("node {i} missing"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let elems = elems
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            e.ok_or(Error::Parse {
                line: 0,
                msg: format!("element {i} missing"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = Mesh::from_parts(coords, elems)?;
    mesh.nodes = base.nodes;
    mesh.elements = base.elements;
    mesh.validate()?;
    Ok(mesh)
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

pub fn format_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "NODES {}", mesh.n_nodes());
    for n in &mesh.nodes {
        let _ = writeln!(s, "{} {:.17e} {:.17e}", n.id, n.x.x, n.x.y);
    }
    let _ = writeln!(s, "ELEMENTS {}", mesh.n_elements());
    for e in &mesh.elements {
        let ids: Vec<String> = e.nodes.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(s, "{} {} {}", e.id, e.kind, ids.join(" "));
    }
    let join = |v: &[usize]| {
        v.iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    for (name, ids) in &mesh.node_sets {
        let _ = writeln!(s, "NSET {name} {} {}", ids.len(), join(ids));
    }
    for (name, p) in &mesh.polylines {
        let kw = if p.closed {
            "POLYLINE_CLOSED"
        } else {
            "POLYLINE"
        };
        let _ = writeln!(s, "{kw} {name} {} {}", p.nodes.len(), join(&p.nodes));
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, format_mesh(mesh))?;
    Ok(())
}
