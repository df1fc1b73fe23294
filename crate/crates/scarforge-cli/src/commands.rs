use std::path::Path;

use scarforge::automaton::{FloquetCircuit, Geometry};
use scarforge::basis::{BasisState, BasisSubset, StateVector};
use scarforge::bch::{self, BchSeries};
use scarforge::dynamics::{self, EvolutionJob, Method, TimeGrid};
use scarforge::hamiltonian::{build_hamiltonian, krylov_subspace, project_sector, uniform_hamiltonian, SymmetrySector};
use scarforge::logmap::{closing_relation, power_decomposition, principal_log};
use scarforge::models::{self, Expected, ModelDefinition};
use scarforge::rules::{self, RuleKind, SearchConstraints};
use scarforge::sparse::SparseOperator;
use scarforge::spectral;
use scarforge::{Error, Result};
use serde_json::json;

use crate::output::{self, num, RunMeta, Table};
use crate::{
    BchArgs, Command, IprArgs, MethodArg, OrbitArgs, RevivalArgs, RstatArgs, RuleType, RulesArgs, SearchArgs,
    SgaArgs, Space, SpinrepArgs,
};

/// 2 for bad input, 3 for numerical guards, 4 for unknown models.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownModel(_) => 4,
        Error::NormDrift(_)
        | Error::NotClosed(_)
        | Error::Guard(..)
        | Error::Symmetry(_)
        | Error::Eigen
        | Error::NoFiniteOrder(_)
        | Error::OrbitTooLong { .. } => 3,
        _ => 2,
    }
}

pub fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Search(a) => search(a),
        Command::Rules(a) => rules_cmd(a),
        Command::Revivals(a) => revivals(a),
        Command::Ipr(a) => ipr(a),
        Command::Rstat(a) => rstat(a),
        Command::Bch(a) => bch_cmd(a),
        Command::SgaCheck(a) => sga(a),
        Command::SpinrepCheck(a) => spinrep(a),
        Command::Orbit(a) => orbit(a),
    }
}

/// Model JSON enters the hash so that file models with equal names differ.
fn model_meta(command: &str, m: &ModelDefinition, len: Option<usize>) -> Result<RunMeta> {
    Ok(RunMeta::new(command, &m.name, len).param("definition", serde_json::to_string(m)?))
}

fn json_with_meta(meta: &RunMeta, body: serde_json::Value) -> Result<String> {
    let doc = json!({
        "meta": {
            "version": scarforge::VERSION,
            "command": meta.command,
            "model": meta.model,
            "L": meta.len,
            "config": meta.config_hash(),
        },
        "result": body,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

/// Writes every pending file once all numbers are in hand.
fn flush(files: Vec<(&Path, String)>) -> Result<()> {
    for (path, text) in files {
        output::write(path, &text)?;
    }
    Ok(())
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len % 2 != 0 || len > 30 {
        return Err(Error::ChainLength(len));
    }
    Ok(())
}

fn default_space(m: &ModelDefinition, space: Option<Space>) -> Space {
    space.unwrap_or(if m.name == "qmbs-c" { Space::Full } else { Space::Krylov })
}

fn subset_for(circuit: &FloquetCircuit, space: Space, start: u64) -> Result<BasisSubset> {
    match space {
        Space::Full => BasisSubset::full(circuit.len()),
        Space::Krylov => krylov_subspace(circuit, start),
    }
}

fn positions(subset: &BasisSubset, states: &[u64]) -> Vec<usize> {
    states.iter().filter_map(|&s| subset.position(s)).collect()
}

fn search(a: &SearchArgs) -> Result<()> {
    check_len(a.len)?;
    let mut c = SearchConstraints::neel(a.len, a.order)?;
    c.require_orbit = a.require_orbit;
    let mut hits = rules::search_models(&c)?;
    let found = hits.len();
    if let Some(k) = a.top {
        hits.truncate(k);
    }
    let meta = RunMeta::new("search", "search", Some(a.len))
        .param("order", a.order)
        .param("require_orbit", a.require_orbit)
        .param("top", format!("{:?}", a.top));
    let mut table = Table::new(&["rank", "permutation", "cycles", "satisfied", "total"]);
    for (k, h) in hits.iter().enumerate() {
        let perm: Vec<String> = h.perm.iter().map(|v| v.to_string()).collect();
        let cycles: Vec<String> =
            h.permutation_cycles.iter().map(|c| format!("({})", c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","))).collect();
        table.push(vec![
            (k + 1).to_string(),
            perm.join(" "),
            format!("\"({})\"", cycles.join(",")),
            h.satisfied.to_string(),
            h.total.to_string(),
        ]);
    }
    println!("{found} admissible gates, showing {}", hits.len());
    for row in table.rows.iter().take(10) {
        println!("{}", row.join("  "));
    }
    match &a.out {
        Some(p) if p.extension().is_some_and(|e| e == "json") => {
            let mut defs = Vec::new();
            for (k, h) in hits.iter().enumerate() {
                let gate = rules::lift(&h.perm);
                let dec = power_decomposition(&gate)?;
                let def = ModelDefinition {
                    name: format!("search-{}", k + 1),
                    gate: gate.to_spec(),
                    geometry: Geometry::Stride4,
                    orbit_seeds: vec!["10".into()],
                    expected: Some(Expected {
                        rule_type: RuleKind::I,
                        rule_ratio: [h.satisfied, h.total],
                        n: dec.n,
                        rule_powers: a.order,
                        coefficients: dec.coefficients.iter().map(|c| [c.re, c.im]).collect(),
                    }),
                };
                defs.push(def);
            }
            flush(vec![(p.as_path(), json_with_meta(&meta, serde_json::to_value(defs)?)?)])
        }
        Some(p) => flush(vec![(p.as_path(), table.render(&meta))]),
        None => Ok(()),
    }
}

fn rules_cmd(a: &RulesArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    check_len(a.len)?;
    let circuit = m.circuit(a.len)?;
    let kind = match a.kind {
        Some(RuleType::I) => RuleKind::I,
        Some(RuleType::II) => RuleKind::II,
        None => m.expected.as_ref().map_or(RuleKind::I, |e| e.rule_type),
    };
    let h0 = principal_log(circuit.gate())?;
    let powers = match (a.powers, &m.expected) {
        (Some(p), _) => p,
        (None, Some(e)) if e.rule_type == kind => e.rule_powers,
        (None, _) => match kind {
            RuleKind::I => h0.order,
            RuleKind::II => closing_relation(&h0)?.m,
        },
    };
    let orbit = m.orbit(a.len)?;
    let report = rules::rule_report(&circuit, &orbit.states, kind, powers, Some(&h0), a.tol)?;
    println!("{} type {:?}: {}/{}", m.name, kind, report.satisfied, report.total);
    if let Some(e) = m.expected.as_ref().filter(|e| e.rule_type == kind) {
        println!("reference: {}/{}", e.rule_ratio[0], e.rule_ratio[1]);
    }
    if let Some(p) = &a.out {
        let meta = model_meta("rules", &m, Some(a.len))?
            .param("type", format!("{kind:?}"))
            .param("powers", powers)
            .param("tol", a.tol);
        flush(vec![(p.as_path(), json_with_meta(&meta, serde_json::to_value(&report)?)?)])?;
    }
    Ok(())
}

fn parse_state(m: &ModelDefinition, circuit: &FloquetCircuit, spec: &str) -> Result<(u64, Option<u64>)> {
    let len = circuit.len();
    let neel = m.neel(len)?.index();
    Ok(match spec {
        "neel" => (neel, None),
        "seed" => (m.seed(len)?.index(), None),
        // resolved once the subset is known
        "generic" => (neel, Some(neel)),
        bits => {
            let s = BasisState::from_bits(bits)?;
            if s.len() != len {
                return Err(Error::Input(format!("state has {} sites, L = {len}", s.len())));
            }
            (s.index(), None)
        }
    })
}

fn hamiltonian_for(circuit: &FloquetCircuit, subset: &BasisSubset, augment: usize) -> Result<SparseOperator> {
    let ch = build_hamiltonian(circuit, subset)?;
    if augment == 0 {
        return Ok(ch.h);
    }
    let series = bch::bch_terms(&ch.a, &ch.b, augment)?;
    bch::augmented_hamiltonian(&series, augment)
}

fn revivals(a: &RevivalArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    check_len(a.len)?;
    let grid = TimeGrid::new(a.dt, a.tmax)?;
    let circuit = m.circuit(a.len)?;
    let (start, generic) = parse_state(&m, &circuit, &a.state)?;
    let subset = subset_for(&circuit, a.space, start)?;
    let initial = match generic {
        Some(_) => {
            let orbit = m.orbit(a.len)?;
            dynamics::generic_state(&subset, &orbit.states).ok_or_else(|| Error::Input("no generic state".into()))?
        }
        None => start,
    };
    if let Some(&s) = a.z_sites.iter().find(|&&s| s >= a.len) {
        return Err(Error::Input(format!("z site {s} outside the chain")));
    }
    let h = hamiltonian_for(&circuit, &subset, a.augment)?;
    let method = match a.method {
        MethodArg::Dense => Method::Dense,
        MethodArg::Taylor => Method::Taylor { tol: a.tol },
    };
    let job = EvolutionJob { hamiltonian: &h, initial: StateVector::basis(&subset, initial)?, grid, method };
    let tr = dynamics::revival_trace(&job, None, &subset, &a.z_sites)?;
    let (lo, hi) = tr.pr_range(10.0, 300.0);
    if lo <= hi {
        println!("N_eff = {}, PR over (10, 300): min {} max {}", subset.dim(), num(lo), num(hi));
    } else {
        println!("N_eff = {}, no samples in the PR window (10, 300)", subset.dim());
    }

    let meta = model_meta("revivals", &m, Some(a.len))?
        .param("state", &a.state)
        .param("dt", a.dt)
        .param("tmax", a.tmax)
        .param("method", format!("{:?}", a.method))
        .param("tol", a.tol)
        .param("space", format!("{:?}", a.space))
        .param("z_sites", format!("{:?}", a.z_sites))
        .param("augment", a.augment);
    let mut cols = vec!["t".to_string(), "pr".into(), "fidelity".into()];
    cols.extend(a.z_sites.iter().map(|s| format!("z_{s}")));
    let mut table = Table::new(&cols.iter().map(String::as_str).collect::<Vec<_>>());
    table.notes.push(format!("N_eff: {}", subset.dim()));
    table.notes.push(format!("initial: {}", scarforge::basis::bits_string(initial, a.len)));
    for k in 0..tr.times.len() {
        let mut row = vec![num(tr.times[k]), num(tr.pr[k]), num(tr.fidelity[k])];
        row.extend(tr.local_z.iter().map(|z| num(z[k])));
        table.push(row);
    }
    let mut files = Vec::new();
    if let Some(p) = &a.out {
        files.push((p.as_path(), table.render(&meta)));
    }
    if let Some(p) = &a.svg {
        files.push((p.as_path(), output::line_svg(&tr.times, &[("PR", &tr.pr), ("fidelity", &tr.fidelity)], "t", true)));
    }
    flush(files)
}

fn ipr(a: &IprArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    check_len(a.len)?;
    let circuit = m.circuit(a.len)?;
    let neel = [BasisState::neel(a.len, 1)?.index(), BasisState::neel(a.len, 0)?.index()];
    let space = default_space(&m, a.space);
    let subset = subset_for(&circuit, space, neel[0])?;
    let h = build_hamiltonian(&circuit, &subset)?.h;
    let an = spectral::analyze_spectrum(&h, &positions(&subset, &neel), a.threshold)?;
    let flagged = an.flagged_levels(1e-9);
    println!("{} eigenstates, {} flagged levels", an.ipr.len(), flagged.len());
    let meta = model_meta("ipr", &m, Some(a.len))?.param("space", format!("{space:?}")).param("threshold", a.threshold);
    let mut table = Table::new(&["E", "ipr", "neel_overlap", "flagged"]);
    for k in 0..an.ipr.len() {
        let ov = an.overlaps[k].iter().copied().fold(0.0, f64::max);
        table.push(vec![num(an.eigensystem.energies[k]), num(an.ipr[k]), num(ov), (an.flagged[k] as u8).to_string()]);
    }
    let mut files = Vec::new();
    if let Some(p) = &a.out {
        files.push((p.as_path(), table.render(&meta)));
    }
    if let Some(p) = &a.svg {
        files.push((p.as_path(), output::scatter_svg(&an.eigensystem.energies, &an.ipr, &an.flagged, "E", "IPR")));
    }
    flush(files)
}

fn rstat(a: &RstatArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    check_len(a.len)?;
    let sector = SymmetrySector::parse(&a.sector)?;
    // the window sum also covers lengths where the two-layer circuit does not fit
    let (subset, h) = uniform_hamiltonian(&m.build_gate()?, a.len, m.geometry.offset(), m.neel(a.len)?.index())?;
    let (hs, _) = project_sector(&h, &subset, &sector)?;
    let e = spectral::eigenvalues(&hs)?;
    let r = spectral::r_statistic(&e)?;
    println!("{} levels in sector, mean r = {}", e.len(), num(r.mean));
    if let Some(p) = &a.out {
        let meta = model_meta("rstat", &m, Some(a.len))?.param("sector", &a.sector);
        let mut table = Table::new(&["bin_lo", "bin_hi", "density"]);
        table.notes.push(format!("levels: {}", e.len()));
        table.notes.push(format!("mean_r: {}", num(r.mean)));
        let w = 1.0 / r.histogram.len() as f64;
        for (k, d) in r.histogram.iter().enumerate() {
            table.push(vec![num(k as f64 * w), num((k + 1) as f64 * w), num(*d)]);
        }
        flush(vec![(p.as_path(), table.render(&meta))])?;
    }
    Ok(())
}

fn bch_cmd(a: &BchArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    check_len(a.len)?;
    let circuit = m.circuit(a.len)?;
    let space = default_space(&m, a.space);
    let subset = subset_for(&circuit, space, m.neel(a.len)?.index())?;
    let ch = build_hamiltonian(&circuit, &subset)?;
    let series: BchSeries = bch::bch_terms(&ch.a, &ch.b, a.orders)?;
    let orbit = m.orbit(a.len)?;
    let pos = positions(&subset, &orbit.states);
    let rows = bch::norm_profile(&series, &pos, a.neff);
    let meta = model_meta("bch", &m, Some(a.len))?
        .param("orders", a.orders)
        .param("space", format!("{space:?}"))
        .param("neff", format!("{:?}", a.neff));
    let mut table = Table::new(&["n", "orbit_norm", "leakage_norm", "generic_norm"]);
    for r in &rows {
        println!("{:2}  {}  {}  {}", r.n, num(r.orbit_norm), num(r.leakage_norm), num(r.generic_norm));
        table.push(vec![r.n.to_string(), num(r.orbit_norm), num(r.leakage_norm), num(r.generic_norm)]);
    }
    if a.fgr {
        let bw = match a.bandwidth {
            Some(b) => b,
            None => {
                let e = spectral::eigenvalues(&ch.h)?;
                e[e.len() - 1] - e[0]
            }
        };
        let d = bch::fgr_rate(&series, &pos, a.len, bw)?;
        println!("decay rate {} (bandwidth {})", num(d.rate), num(bw));
        table.notes.push(format!("fgr_rate: {}", num(d.rate)));
        table.notes.push(format!("bandwidth: {}", num(bw)));
    }
    let mut files = Vec::new();
    if let Some(p) = &a.out {
        files.push((p.as_path(), table.render(&meta)));
    }
    if let Some(p) = &a.svg {
        let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let o: Vec<f64> = rows.iter().map(|r| r.orbit_norm).collect();
        let l: Vec<f64> = rows.iter().map(|r| r.leakage_norm).collect();
        let g: Vec<f64> = rows.iter().map(|r| r.generic_norm).collect();
        files.push((p.as_path(), output::line_svg(&n, &[("orbit", &o), ("leakage", &l), ("generic", &g)], "n", true)));
    }
    flush(files)
}

fn sga(a: &SgaArgs) -> Result<()> {
    check_len(a.len)?;
    let r = models::sga_residual(a.len, a.eps)?;
    let b = models::embedded_block_deviation(a.len)?;
    println!("residual {} at eps = {}", num(r), num(a.eps));
    println!("embedded block deviation {}", num(b));
    Ok(())
}

fn spinrep(a: &SpinrepArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    let d = models::verify_spin_representation(&m)?;
    println!("{}: max deviation {}", m.name, num(d));
    Ok(())
}

fn orbit(a: &OrbitArgs) -> Result<()> {
    let m = models::resolve(&a.model)?;
    check_len(a.len)?;
    let circuit = m.circuit(a.len)?;
    let seed = match &a.seed {
        Some(bits) => BasisState::from_bits(bits)?,
        None => m.seed(a.len)?,
    };
    let l_max = 1usize << a.len.min(24);
    let report = circuit.orbit_of(seed, l_max)?.report();
    println!("length {}, Phi = {}", report.length, num(report.phi));
    for s in &report.cycle {
        println!("{s}");
    }
    if let Some(p) = &a.out {
        let meta = model_meta("orbit", &m, Some(a.len))?.param("seed", seed.bits());
        flush(vec![(p.as_path(), json_with_meta(&meta, serde_json::to_value(&report)?)?)])?;
    }
    Ok(())
}
