//! Run configuration files.
//!
//! One `section.key = value` assignment per line, `#` comments, lists in
//! brackets. Named sections carry their name in the middle:
//!
//! ```text
//! analysis.dual = cgi
//! domain.host.generator = rect
//! domain.host.rect = [0, 0, 4, 4]
//! tying.glue.patch = patch
//! bc.load.kind = pressure
//! ```
//!
//! A file describes either a model (`domain`, `tying`, `bc` sections) or one
//! of the built-in benchmarks (`benchmark` section). Unknown sections and
//! keys are errors.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mortex::bench::examples::ExampleName;
use mortex::bench::inclusion::EshelbyConfig;
use mortex::bench::patch::{HostMesh, PatchCase, PatchLoad, PatchTestConfig, UniformCompressionConfig};
use mortex::elasticity::{Formulation, Material};
use mortex::mesh::{
    generate_disk_mesh, generate_structured_mesh, io::read_mesh, Distortion, ElementKind, Mesh, Rect,
};
use mortex::model::{Bc, Domain, DualScheme, Kappa, Model, Tying};
use mortex::{Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: Value,
    line: usize,
}

/// Assignments of one section, consumed key by key.
#[derive(Debug, Clone)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    if s.len() >= 2 && s.starts_with('"') && s.ends_with('"') {
        s[1..s.len() - 1].to_string()
    } else {
        s.to_string()
    }
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_value(raw: &str, line: usize) -> Result<Value> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(err(line, "missing value"));
    }
    if let Some(inner) = raw.strip_prefix('[') {
        let inner = inner.strip_suffix(']').ok_or_else(|| err(line, "unterminated list"))?;
        if inner.trim().is_empty() {
            return Ok(Value::List(Vec::new()));
        }
        let items: Vec<String> = inner.split(',').map(unquote).collect();
        if items.iter().any(|s| s.is_empty()) {
            return Err(err(line, "empty list item"));
        }
        return Ok(Value::List(items));
    }
    Ok(Value::Scalar(unquote(raw)))
}

fn valid_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Sections in order of first appearance.
fn parse_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = strip_comment(raw).trim();
        if l.is_empty() {
            continue;
        }
        let (lhs, rhs) = l.split_once('=').ok_or_else(|| err(line, format!("expected 'section.key = value', found '{l}'")))?;
        let path = lhs.trim();
        let (section, key) = path.rsplit_once('.').ok_or_else(|| err(line, format!("key '{path}' has no section")))?;
        if !section.split('.').chain([key]).all(valid_ident) {
            return Err(err(line, format!("malformed key '{path}'")));
        }
        let value = parse_value(rhs, line)?;
        let s = match sections.iter_mut().position(|s| s.name == section) {
            Some(k) => &mut sections[k],
            None => {
                sections.push(Section { name: section.to_string(), line, entries: Vec::new() });
                sections.last_mut().unwrap()
            }
        };
        if let Some(prev) = s.entries.iter().find(|e| e.key == key) {
            return Err(err(line, format!("'{path}' already set on line {}", prev.line)));
        }
        s.entries.push(Entry { key: key.to_string(), value, line });
    }
    Ok(sections)
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let k = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(k))
    }

    fn take_scalar(&mut self, key: &str) -> Result<Option<(String, usize)>> {
        match self.take(key) {
            None => Ok(None),
            Some(Entry { value: Value::Scalar(s), line, .. }) => Ok(Some((s, line))),
            Some(e) => Err(err(e.line, format!("'{}.{key}' expects a single value, found a list", self.name))),
        }
    }

    fn get<T: FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        let name = self.name.clone();
        self.take_scalar(key)?
            .map(|(s, line)| s.parse().map_err(|_| err(line, format!("'{name}.{key}' expects {what}, found '{s}'"))))
            .transpose()
    }

    fn require<T: FromStr>(&mut self, key: &str, what: &str) -> Result<T> {
        let line = self.line;
        let name = self.name.clone();
        self.get(key, what)?.ok_or_else(|| err(line, format!("section '{name}' needs '{key}'")))
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.get(key, "a number")
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.get(key, "true or false")
    }

    fn string(&mut self, key: &str) -> Result<Option<String>> {
        Ok(self.take_scalar(key)?.map(|(s, _)| s))
    }

    /// Values parsed through their `FromStr` implementation, which names the
    /// accepted spellings in its message.
    fn choice<T: FromStr<Err = Error>>(&mut self, key: &str) -> Result<Option<T>> {
        self.take_scalar(key)?
            .map(|(s, line)| s.parse().map_err(|e: Error| err(line, inner_message(e))))
            .transpose()
    }

    fn list<T: FromStr>(&mut self, key: &str, what: &str, len: Option<usize>) -> Result<Option<Vec<T>>> {
        let name = self.name.clone();
        let Some(e) = self.take(key) else { return Ok(None) };
        let items = match e.value {
            Value::List(v) => v,
            Value::Scalar(s) => vec![s],
        };
        if let Some(n) = len {
            if items.len() != n {
                return Err(err(e.line, format!("'{name}.{key}' expects {n} values, found {}", items.len())));
            }
        }
        items
            .iter()
            .map(|s| s.parse().map_err(|_| err(e.line, format!("'{name}.{key}' expects {what}, found '{s}'"))))
            .collect::<Result<Vec<T>>>()
            .map(Some)
    }

    /// Fails on the first key nobody asked for.
    fn finish(self) -> Result<()> {
        match self.entries.first() {
            Some(e) => Err(err(e.line, format!("unknown key '{}.{}'", self.name, e.key))),
            None => Ok(()),
        }
    }
}

fn inner_message(e: Error) -> String {
    match e {
        Error::InvalidArgument(m) => m,
        e => e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    File(PathBuf),
    Rect { rect: Rect, nx: usize, ny: usize, kind: ElementKind, jitter: f64, seed: u64 },
    Disk { radius: f64, boundary_nodes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub name: String,
    pub mesh: MeshSource,
    pub translate: Vec2,
    pub material: Material,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TyingSpec {
    pub name: String,
    pub patch: String,
    pub host: String,
    pub chain: String,
    pub footprint: Option<String>,
    pub dual: DualScheme,
    pub kappa: Kappa,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BcKind {
    Displacement { target: String, components: Vec<usize>, value: f64 },
    Pressure { polyline: String, p: f64 },
    LinearPressure { polyline: String, a: f64, bx: f64, by: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcSpec {
    pub name: String,
    pub domain: String,
    pub kind: BcKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Benchmark {
    PatchTest(PatchTestConfig),
    UniformCompression(UniformCompressionConfig),
    /// Every scheme and host variant of one case, per material contrast.
    Table { case: PatchCase, contrasts: Vec<f64> },
    Eshelby(EshelbyConfig),
    Convergence { base: EshelbyConfig, n_ms: Vec<usize> },
    KappaSweep { base: EshelbyConfig, kappas: Vec<usize> },
    Example { name: ExampleName, kappa: Option<usize>, triangulate: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    pub triangulate: bool,
    /// Domains ordered hosts first.
    pub domains: Vec<DomainSpec>,
    pub tyings: Vec<TyingSpec>,
    pub bcs: Vec<BcSpec>,
    pub benchmark: Option<Benchmark>,
}

fn parse_kind(s: &str, line: usize) -> Result<ElementKind> {
    match s {
        "q4" => Ok(ElementKind::Q4),
        "t3" => Ok(ElementKind::T3),
        _ => Err(err(line, format!("element must be q4 or t3, found '{s}'"))),
    }
}

fn parse_domain(mut s: Section, name: &str) -> Result<DomainSpec> {
    let line = s.line;
    let file = s.string("mesh")?;
    let generator = s.take_scalar("generator")?;
    let mesh = match (file, generator) {
        (Some(f), None) => MeshSource::File(PathBuf::from(f)),
        (None, Some((g, gl))) if g == "rect" => {
            let r: Vec<f64> = s.list("rect", "numbers", Some(4))?.ok_or_else(|| err(line, format!("domain '{name}' needs 'rect'")))?;
            let d: Vec<usize> = s.list("divisions", "integers", Some(2))?.ok_or_else(|| err(line, format!("domain '{name}' needs 'divisions'")))?;
            let kind = match s.take_scalar("element")? {
                Some((k, kl)) => parse_kind(&k, kl)?,
                None => ElementKind::Q4,
            };
            if !(r[2] > r[0] && r[3] > r[1]) || d.contains(&0) {
                return Err(err(gl, format!("domain '{name}' has an empty rectangle or zero divisions")));
            }
            MeshSource::Rect {
                rect: Rect::new(r[0], r[1], r[2], r[3]),
                nx: d[0],
                ny: d[1],
                kind,
                jitter: s.f64("jitter")?.unwrap_or(0.0),
                seed: s.get("seed", "an integer")?.unwrap_or(0),
            }
        }
        (None, Some((g, _))) if g == "disk" => MeshSource::Disk {
            radius: s.require("radius", "a number")?,
            boundary_nodes: s.require("boundary_nodes", "an integer")?,
        },
        (None, Some((g, gl))) => return Err(err(gl, format!("unknown generator '{g}' (expected rect or disk)"))),
        (Some(_), Some((_, gl))) => return Err(err(gl, format!("domain '{name}' sets both 'mesh' and 'generator'"))),
        (None, None) => return Err(err(line, format!("domain '{name}' needs 'mesh' or 'generator'"))),
    };
    let translate = match s.list::<f64>("translate", "numbers", Some(2))? {
        Some(t) => Vec2::new(t[0], t[1]),
        None => Vec2::zeros(),
    };
    let e = s.require("e", "a number")?;
    let nu = s.require("nu", "a number")?;
    let formulation = match s.take_scalar("formulation")? {
        None => Formulation::PlaneStrain,
        Some((f, _)) if f == "plane-strain" => Formulation::PlaneStrain,
        Some((f, _)) if f == "plane-stress" => Formulation::PlaneStress,
        Some((f, fl)) => return Err(err(fl, format!("formulation must be plane-strain or plane-stress, found '{f}'"))),
    };
    let material = Material::new(e, nu, formulation).map_err(|e| err(line, inner_message(e)))?;
    s.finish()?;
    Ok(DomainSpec { name: name.to_string(), mesh, translate, material })
}

fn parse_tying(mut s: Section, name: &str, dual: DualScheme, kappa: Kappa) -> Result<TyingSpec> {
    let t = TyingSpec {
        name: name.to_string(),
        patch: s.require("patch", "a domain name")?,
        host: s.require("host", "a domain name")?,
        chain: s.string("chain")?.unwrap_or_else(|| "boundary".into()),
        footprint: s.string("footprint")?,
        dual: s.choice("dual")?.unwrap_or(dual),
        kappa: s.choice("kappa")?.unwrap_or(kappa),
    };
    s.finish()?;
    Ok(t)
}

fn parse_component(s: &str, line: usize) -> Result<Vec<usize>> {
    match s {
        "x" | "0" => Ok(vec![0]),
        "y" | "1" => Ok(vec![1]),
        "both" => Ok(vec![0, 1]),
        _ => Err(err(line, format!("component must be x, y or both, found '{s}'"))),
    }
}

fn parse_bc(mut s: Section, name: &str) -> Result<BcSpec> {
    let domain = s.require("domain", "a domain name")?;
    let (kind, kl) = s.take_scalar("kind")?.ok_or_else(|| err(s.line, format!("boundary condition '{name}' needs 'kind'")))?;
    let kind = match kind.as_str() {
        "displacement" => {
            let (c, cl) = s.take_scalar("component")?.ok_or_else(|| err(kl, format!("boundary condition '{name}' needs 'component'")))?;
            BcKind::Displacement {
                target: s.require("target", "a node set or polyline")?,
                components: parse_component(&c, cl)?,
                value: s.f64("value")?.unwrap_or(0.0),
            }
        }
        "pressure" => BcKind::Pressure { polyline: s.require("polyline", "a polyline")?, p: s.require("p", "a number")? },
        "linear-pressure" => BcKind::LinearPressure {
            polyline: s.require("polyline", "a polyline")?,
            a: s.f64("a")?.unwrap_or(0.0),
            bx: s.f64("bx")?.unwrap_or(0.0),
            by: s.f64("by")?.unwrap_or(0.0),
        },
        k => return Err(err(kl, format!("unknown boundary condition kind '{k}' (expected displacement, pressure or linear-pressure)"))),
    };
    s.finish()?;
    Ok(BcSpec { name: name.to_string(), domain, kind })
}

fn eshelby_base(s: &mut Section, n_m: usize, dual: DualScheme, kappa: Kappa, triangulate: bool) -> Result<EshelbyConfig> {
    let mut c = EshelbyConfig::new(n_m).with_scheme(dual, kappa);
    c.triangulate = triangulate;
    if let Some(v) = s.f64("mc")? {
        c.mc_target = v;
    }
    if let Some(v) = s.f64("contrast")? {
        c.contrast = v;
    }
    if let Some(v) = s.f64("e")? {
        c.e_inclusion = v;
    }
    if let Some(v) = s.f64("nu")? {
        c.nu = v;
    }
    if let Some(v) = s.f64("sigma0")? {
        c.sigma0 = v;
    }
    if let Some(v) = s.f64("radius")? {
        c.radius = v;
    }
    if let Some(v) = s.f64("length")? {
        c.length = v;
    }
    if let Some(v) = s.f64("growth")? {
        c.growth = v;
    }
    if let Some(v) = s.f64("h_max")? {
        c.h_max = v;
    }
    Ok(c)
}

fn parse_benchmark(mut s: Section, dual: DualScheme, kappa: Kappa, triangulate: bool) -> Result<Benchmark> {
    let (kind, kl) = s.take_scalar("kind")?.ok_or_else(|| err(s.line, "section 'benchmark' needs 'kind'"))?;
    let dual = s.choice("dual")?.unwrap_or(dual);
    let kappa = s.choice("kappa")?.unwrap_or(kappa);
    let triangulate = s.bool("triangulate")?.unwrap_or(triangulate);
    let b = match kind.as_str() {
        "patch-test" => {
            let case = s.choice("case")?.unwrap_or(PatchCase::FinerPatch);
            let load = s.choice("load")?.unwrap_or(PatchLoad::Compression);
            let mut c = PatchTestConfig::new(case, load).with_scheme(dual, kappa);
            c.triangulate = triangulate;
            if let Some(h) = s.choice::<HostMesh>("host")? {
                c.host = h;
            }
            if let Some(v) = s.f64("contrast")? {
                c.contrast = v;
            }
            if let Some(v) = s.f64("e")? {
                c.e_patch = v;
            }
            if let Some(v) = s.f64("nu")? {
                c.nu = v;
            }
            if let Some(v) = s.f64("sigma0")? {
                c.sigma0 = v;
            }
            if let Some(v) = s.get("seed", "an integer")? {
                c.seed = v;
            }
            if let Some(v) = s.f64("jitter")? {
                c.jitter = v;
            }
            Benchmark::PatchTest(c)
        }
        "uniform-compression" => {
            let mut c = UniformCompressionConfig { triangulate, scheme: dual, ..Default::default() };
            if let Some(v) = s.f64("e")? {
                c.e = v;
            }
            if let Some(v) = s.f64("nu")? {
                c.nu = v;
            }
            if let Some(v) = s.f64("sigma0")? {
                c.sigma0 = v;
            }
            Benchmark::UniformCompression(c)
        }
        "table" => Benchmark::Table {
            case: s.choice("case")?.unwrap_or(PatchCase::FinerPatch),
            contrasts: s.list("contrasts", "numbers", None)?.unwrap_or_else(|| vec![1000.0, 1e-3]),
        },
        "eshelby" => {
            let n_m = s.require("nm", "an integer")?;
            Benchmark::Eshelby(eshelby_base(&mut s, n_m, dual, kappa, triangulate)?)
        }
        "convergence" => {
            let n_ms: Vec<usize> = s.list("nms", "integers", None)?.ok_or_else(|| err(kl, "convergence needs 'nms'"))?;
            if n_ms.len() < 2 {
                return Err(err(kl, "convergence needs at least two entries in 'nms'"));
            }
            Benchmark::Convergence { base: eshelby_base(&mut s, n_ms[0], dual, kappa, triangulate)?, n_ms }
        }
        "kappa-sweep" => {
            let n_m = s.require("nm", "an integer")?;
            let kappas = s.list("kappas", "integers", None)?.ok_or_else(|| err(kl, "kappa-sweep needs 'kappas'"))?;
            Benchmark::KappaSweep { base: eshelby_base(&mut s, n_m, dual, kappa, triangulate)?, kappas }
        }
        "example" => Benchmark::Example {
            name: s.choice("name")?.ok_or_else(|| err(kl, "example needs 'name'"))?,
            kappa: match kappa {
                Kappa::Fixed(k) => Some(k),
                _ => None,
            },
            triangulate,
        },
        k => {
            return Err(err(
                kl,
                format!("unknown benchmark '{k}' (expected patch-test, uniform-compression, table, eshelby, convergence, kappa-sweep or example)"),
            ))
        }
    };
    s.finish()?;
    Ok(b)
}

/// Reorders domains so that every host precedes the patches tied into it.
fn host_order(domains: Vec<DomainSpec>, tyings: &[TyingSpec], line_of: &HashMap<String, usize>) -> Result<Vec<DomainSpec>> {
    let index: HashMap<&str, usize> = domains.iter().enumerate().map(|(i, d)| (d.name.as_str(), i)).collect();
    let mut parent: Vec<Option<usize>> = vec![None; domains.len()];
    for t in tyings {
        let line = line_of[&format!("tying.{}", t.name)];
        let find = |n: &str| index.get(n).copied().ok_or_else(|| err(line, format!("tying '{}' references unknown domain '{n}'", t.name)));
        let (p, h) = (find(&t.patch)?, find(&t.host)?);
        if p == h {
            return Err(err(line, format!("tying '{}' ties domain '{}' to itself", t.name, t.patch)));
        }
        if parent[p].is_some_and(|q| q != h) {
            return Err(err(line, format!("domain '{}' is tied to two hosts", t.patch)));
        }
        parent[p] = Some(h);
    }
    let mut depth = vec![0; domains.len()];
    for d in 0..domains.len() {
        let mut cur = d;
        while let Some(p) = parent[cur] {
            cur = p;
            depth[d] += 1;
            if depth[d] > domains.len() {
                return Err(err(line_of[&format!("domain.{}", domains[d].name)], "tyings form a cycle"));
            }
        }
    }
    let mut order: Vec<(usize, DomainSpec)> = domains.into_iter().enumerate().map(|(i, d)| (depth[i], d)).collect();
    order.sort_by_key(|(d, _)| *d);
    Ok(order.into_iter().map(|(_, d)| d).collect())
}

/// Parses a configuration. Paths stay as written.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut dual = DualScheme::SliP1;
    let mut kappa = Kappa::Auto;
    let mut triangulate = false;
    let mut output = None;
    let mut sections = parse_sections(text)?;
    let line_of: HashMap<String, usize> = sections.iter().map(|s| (s.name.clone(), s.line)).collect();

    // defaults first: tyings and benchmarks read them
    if let Some(k) = sections.iter().position(|s| s.name == "analysis") {
        let mut s = sections.remove(k);
        dual = s.choice("dual")?.unwrap_or(dual);
        kappa = s.choice("kappa")?.unwrap_or(kappa);
        triangulate = s.bool("triangulate")?.unwrap_or(false);
        s.finish()?;
    }
    let mut domains = Vec::new();
    let mut tyings = Vec::new();
    let mut bcs = Vec::new();
    let mut benchmark = None;
    let mut benchmark_line = 0;
    for s in sections {
        let parts: Vec<&str> = s.name.splitn(2, '.').collect();
        let line = s.line;
        match parts.as_slice() {
            ["output"] => {
                let mut s = s;
                output = s.string("dir")?.map(PathBuf::from);
                s.finish()?;
            }
            ["benchmark"] => {
                benchmark_line = line;
                benchmark = Some(parse_benchmark(s, dual, kappa, triangulate)?);
            }
            ["domain", n] => {
                let n = n.to_string();
                domains.push(parse_domain(s, &n)?)
            }
            ["tying", n] => {
                let n = n.to_string();
                tyings.push(parse_tying(s, &n, dual, kappa)?)
            }
            ["bc", n] => {
                let n = n.to_string();
                bcs.push(parse_bc(s, &n)?)
            }
            _ => return Err(err(line, format!("unknown section '{}'", s.name))),
        }
    }
    if benchmark.is_some() && !(domains.is_empty() && tyings.is_empty() && bcs.is_empty()) {
        return Err(err(benchmark_line, "a benchmark configuration cannot also define domains, tyings or boundary conditions"));
    }
    if benchmark.is_none() && domains.is_empty() {
        return Err(err(0, "configuration defines neither a benchmark nor any domain"));
    }
    for b in &bcs {
        if !domains.iter().any(|d| d.name == b.domain) {
            return Err(err(line_of[&format!("bc.{}", b.name)], format!("boundary condition '{}' references unknown domain '{}'", b.name, b.domain)));
        }
    }
    let domains = host_order(domains, &tyings, &line_of)?;
    Ok(RunConfig { output, triangulate, domains, tyings, bcs, benchmark })
}

/// Reads and parses a configuration file, resolving mesh paths against its
/// directory and checking that they exist.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read '{}': {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for d in &mut cfg.domains {
        if let MeshSource::File(f) = &mut d.mesh {
            if f.is_relative() {
                *f = base.join(&*f);
            }
            if !f.is_file() {
                return Err(Error::InvalidArgument(format!("mesh file '{}' of domain '{}' does not exist", f.display(), d.name)));
            }
        }
    }
    Ok(cfg)
}

impl DomainSpec {
    pub fn build_mesh(&self) -> Result<Mesh> {
        let mut m = match &self.mesh {
            MeshSource::File(p) => read_mesh(p)?,
            MeshSource::Rect { rect, nx, ny, kind, jitter, seed } => {
                let d = (*jitter > 0.0).then_some(Distortion { seed: *seed, amplitude: *jitter });
                generate_structured_mesh(*rect, *nx, *ny, *kind, d)?
            }
            MeshSource::Disk { radius, boundary_nodes } => generate_disk_mesh(*radius, *boundary_nodes)?,
        };
        if self.translate != Vec2::zeros() {
            m.translate(self.translate);
        }
        Ok(m)
    }
}

impl RunConfig {
    /// Assembles the model of a model configuration.
    pub fn build_model(&self) -> Result<Model> {
        let index = |n: &str| self.domains.iter().position(|d| d.name == n).expect("names checked while parsing");
        let domains = self
            .domains
            .iter()
            .map(|d| Ok(Domain::new(d.name.clone(), d.build_mesh()?, d.material)))
            .collect::<Result<Vec<_>>>()?;
        let tyings = self
            .tyings
            .iter()
            .map(|t| Tying {
                patch: index(&t.patch),
                host: index(&t.host),
                chain: t.chain.clone(),
                footprint: t.footprint.clone(),
                scheme: t.dual,
                kappa: t.kappa,
            })
            .collect();
        let mut bcs = Vec::new();
        for b in &self.bcs {
            let domain = index(&b.domain);
            match &b.kind {
                BcKind::Displacement { target, components, value } => {
                    for &component in components {
                        bcs.push(Bc::Displacement { domain, target: target.clone(), component, value: *value });
                    }
                }
                BcKind::Pressure { polyline, p } => bcs.push(Bc::Pressure { domain, polyline: polyline.clone(), p: *p }),
                BcKind::LinearPressure { polyline, a, bx, by } => {
                    bcs.push(Bc::LinearPressure { domain, polyline: polyline.clone(), a: *a, bx: *bx, by: *by })
                }
            }
        }
        Ok(Model { domains, tyings, bcs, triangulate: self.triangulate })
    }

    /// Applies command-line overrides of the multiplier scheme.
    pub fn override_scheme(&mut self, dual: Option<DualScheme>, kappa: Option<Kappa>, triangulate: bool) {
        for t in &mut self.tyings {
            t.dual = dual.unwrap_or(t.dual);
            t.kappa = kappa.unwrap_or(t.kappa);
        }
        self.triangulate |= triangulate;
        if let Some(b) = &mut self.benchmark {
            match b {
                Benchmark::PatchTest(c) => {
                    c.scheme = dual.unwrap_or(c.scheme);
                    c.kappa = kappa.unwrap_or(c.kappa);
                    c.triangulate |= triangulate;
                }
                Benchmark::UniformCompression(c) => {
                    c.scheme = dual.unwrap_or(c.scheme);
                    c.triangulate |= triangulate;
                }
                Benchmark::Eshelby(c) | Benchmark::Convergence { base: c, .. } | Benchmark::KappaSweep { base: c, .. } => {
                    c.scheme = dual.unwrap_or(c.scheme);
                    c.kappa = kappa.unwrap_or(c.kappa);
                    c.triangulate |= triangulate;
                }
                Benchmark::Example { kappa: k, triangulate: t, .. } => {
                    if let Some(Kappa::Fixed(v)) = kappa {
                        *k = Some(v);
                    }
                    *t |= triangulate;
                }
                Benchmark::Table { .. } => {}
            }
        }
    }
}
