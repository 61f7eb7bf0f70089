//! Acceptance run: prints one PASS or FAIL line per criterion. Failures that
//! are analysed in the project notes do not fail the test binary; errors
//! raised by the solver do.

mod common;

use mortex::bench::examples::{run_multi_level, run_plate_with_hole, MultiLevelConfig, PlateConfig};
use mortex::bench::inclusion::{convergence, convergence_slope, kappa_sweep, run_eshelby, EshelbyConfig};
use mortex::bench::patch::{
    run_patch_test, run_table, run_uniform_compression, HostMesh, PatchCase, PatchLoad, PatchTestConfig,
    UniformCompressionConfig,
};
use mortex::model::{DualScheme, Kappa};
use mortex::Result;
use rayon::prelude::*;
use std::time::Instant;

struct Outcome {
    pass: bool,
    details: String,
}

fn outcome(pass: bool, details: String) -> Outcome {
    Outcome { pass, details }
}

fn e_r(cfg: &PatchTestConfig) -> Result<(f64, f64)> {
    let r = run_patch_test(cfg)?.report;
    Ok((r.get("E_r").unwrap(), r.get("max_rel_dev").unwrap()))
}

fn uniform_compression() -> Result<Outcome> {
    let tri = run_uniform_compression(&UniformCompressionConfig { triangulate: true, ..Default::default() })?;
    let raw = run_uniform_compression(&UniformCompressionConfig::default())?;
    let (t, r) = (tri.report.get("uy_max_rel_dev").unwrap(), raw.report.get("uy_max_rel_dev").unwrap());
    Ok(outcome(t <= 1e-9 && r > 1e-3, format!("triangulated {t:.2e} (<= 1e-9), untriangulated {r:.2e} (> 1e-3)")))
}

const CASE1_KAPPAS: [usize; 7] = [1, 6, 12, 24, 48, 96, 192];

fn compression_case1() -> Result<Outcome> {
    let base = PatchTestConfig::new(PatchCase::FinerPatch, PatchLoad::Compression);
    let n_m = base.divisions().0;
    let mut cfgs = vec![base.clone()];
    let mut tri = base.clone();
    tri.triangulate = true;
    cfgs.push(tri);
    // kappa cannot exceed the chain length
    cfgs.extend(CASE1_KAPPAS.iter().map(|&k| base.clone().with_scheme(DualScheme::Cgi, Kappa::Fixed(k.min(n_m)))));
    let res = cfgs.par_iter().map(e_r).collect::<Result<Vec<_>>>()?;
    let sli_dev = res[0].1;
    let tri = res[1].0;
    let cgi: Vec<f64> = res[2..].iter().map(|r| r.0).collect();
    let monotone = cgi.windows(2).all(|w| w[1] <= w[0]);
    let last = *cgi.last().unwrap();
    let list = cgi.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ");
    Ok(outcome(
        sli_dev >= 1.0 && monotone && last <= 5e-3 && tri <= 1e-4,
        format!(
            "SLI max deviation {sli_dev:.2e} (>= 1); CGI E_r over kappa {CASE1_KAPPAS:?}: {list} (monotone {monotone}, final <= 5e-3); triangulated {tri:.2e} (<= 1e-4)"
        ),
    ))
}

fn bending_case1() -> Result<Outcome> {
    let base = PatchTestConfig::new(PatchCase::FinerPatch, PatchLoad::Bending);
    let n_m = base.divisions().0;
    let mut aligned = base.clone().with_scheme(DualScheme::Cgi, Kappa::Fixed(n_m));
    aligned.host = HostMesh::AlignedQuads;
    let cfgs = [
        base.clone().with_scheme(DualScheme::Cgi, Kappa::Fixed(6)),
        base.clone().with_scheme(DualScheme::Cgi, Kappa::Fixed(12)),
        aligned,
    ];
    let res = cfgs.par_iter().map(e_r).collect::<Result<Vec<_>>>()?;
    let (k6, k12, full) = (res[0].0, res[1].0, res[2].0);
    Ok(outcome(
        k12 <= 1e-2 && k6 >= 10.0 * k12 && full <= 1e-3,
        format!(
            "kappa 12 {k12:.2e} (<= 1e-2); kappa 6 / kappa 12 = {:.1} (>= 10); kappa {n_m} on aligned quads {full:.2e} (<= 1e-3)",
            k6 / k12
        ),
    ))
}

fn table_matrix() -> Result<Outcome> {
    let mut pass = true;
    let mut rows = 0;
    let mut worst = String::new();
    let mut worst_ratio: f64 = 0.0;
    for case in [PatchCase::FinerPatch, PatchCase::CoarserPatch] {
        for contrast in [1000.0, 1e-3] {
            let table = run_table(case, contrast)?;
            rows += table.len();
            for cgi in table.iter().filter(|r| r.scheme == DualScheme::Cgi) {
                for sli in table.iter().filter(|r| r.scheme != DualScheme::Cgi && r.host == cgi.host && r.triangulate == cgi.triangulate) {
                    for (load, c, s) in [("bending", cgi.bending, sli.bending), ("compression", cgi.compression, sli.compression)] {
                        // both at round-off: the exact field is represented
                        let ok = c < s || (c <= 1e-9 && s <= 1e-9);
                        pass &= ok;
                        let ratio = c / s;
                        if !ok || ratio > worst_ratio {
                            worst_ratio = worst_ratio.max(ratio);
                            worst = format!(
                                "case {case} contrast {contrast:e} {} {}{} {load}: cgi {c:.2e} vs {} {s:.2e}",
                                if ok { "closest" } else { "violated" },
                                cgi.host,
                                if cgi.triangulate { " tri" } else { "" },
                                sli.scheme
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(outcome(pass && rows == 48, format!("{rows} rows solved; {worst}")))
}

fn eshelby() -> Result<Outcome> {
    let cgi = run_eshelby(&EshelbyConfig::new(128).with_scheme(DualScheme::Cgi, Kappa::Fixed(16)))?.report.get("E_r").unwrap();
    let kappas = [1, 2, 4, 8, 16, 32, 64, 128];
    let sweep = kappa_sweep(&EshelbyConfig::new(1024), &kappas)?;
    let errs: Vec<f64> = sweep.iter().map(|p| p.e_r).collect();
    let imin = (0..errs.len()).min_by(|&a, &b| errs[a].total_cmp(&errs[b])).unwrap();
    let k_min = kappas[imin];
    let rises = errs[kappas.len() - 1] > errs[imin];
    let conv = convergence(&EshelbyConfig::new(128), &[128, 256, 512, 1024])?;
    let slope = convergence_slope(&conv)?;
    let list = errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ");
    Ok(outcome(
        cgi < 1e-3 && (k_min == 16 || k_min == 32) && rises && (slope - 1.0).abs() <= 0.25,
        format!(
            "CGI kappa 16 at N_m 128 {cgi:.2e} (< 1e-3); sweep at N_m 1024 over {kappas:?}: {list} (minimum at {k_min}, rises {rises}); SLI slope {slope:.2} (1 +- 0.25)"
        ),
    ))
}

fn collect(checks: Vec<(&str, common::Check)>) -> Outcome {
    let mut pass = true;
    let parts: Vec<String> = checks
        .into_iter()
        .map(|(name, c)| match c {
            Ok(s) => format!("{name}: {s}"),
            Err(e) => {
                pass = false;
                format!("{name} FAILED: {e}")
            }
        })
        .collect();
    outcome(pass, parts.join("; "))
}

fn analytic() -> Result<Outcome> {
    Ok(collect(vec![
        ("continuity", common::eshelby_continuity(11)),
        ("homogeneous limit", common::eshelby_homogeneous_limit()),
    ]))
}

fn properties() -> Result<Outcome> {
    Ok(collect(vec![
        ("shape functions", common::shape_function_identities(21)),
        ("clipping", common::clip_area_conservation(22)),
        ("mortar rows", common::mortar_row_sums(23, 40)),
        ("kappa 1", common::kappa_one_is_sli()),
        ("conforming", common::conforming_matches_monolithic()),
        ("saddle", common::saddle_structure_and_equilibrium()),
    ]))
}

fn examples() -> Result<Outcome> {
    let plate = run_plate_with_hole(&PlateConfig::default())?;
    let (sli, cgi) = (plate.get("sli_max_dev").unwrap(), plate.get("cgi_max_dev").unwrap());
    let multi = run_multi_level(&MultiLevelConfig::default())?;
    let levels = multi.get("levels").unwrap();
    let mut pass = cgi < sli && levels >= 2.0;
    let mut parts = vec![format!("plate with hole CGI {cgi:.3e} vs SLI {sli:.3e}"), format!("{levels} nesting levels")];
    for name in ["inclusion1", "inclusion2"] {
        let s = multi.get(&format!("sli_{name}_max_jump")).unwrap();
        let c = multi.get(&format!("cgi_{name}_max_jump")).unwrap();
        pass &= s >= 5.0 * c;
        parts.push(format!("{name} jump reduced {:.1}x", s / c));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 8] = [
        ("uniform compression", uniform_compression),
        ("compression case 1", compression_case1),
        ("bending case 1", bending_case1),
        ("table matrix", table_matrix),
        ("eshelby inclusion", eshelby),
        ("analytic oracles", analytic),
        ("property suite", properties),
        ("examples", examples),
    ];
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match run() {
            Ok(o) => {
                passed += o.pass as usize;
                println!(
                    "criterion {} {}: {name}: {} [{:.1}s]",
                    i + 1,
                    if o.pass { "PASS" } else { "FAIL" },
                    o.details,
                    t.elapsed().as_secs_f64()
                );
            }
            Err(e) => panic!("criterion {} ({name}) could not run: {e}", i + 1),
        }
    }
    println!("{passed}/{} criteria pass", criteria.len());
}
