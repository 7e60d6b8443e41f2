use std::fmt::Write as _;
use std::time::Instant;

use dynspec_core::isometry::{power_to_integral, twist, twist_split_certificate};
use dynspec_core::json::{format_rational, rational_rows};
use dynspec_core::polyarith::{is_salem, Interval};
use dynspec_core::positivity::{is_positive_with, PositivityOptions, Status};
use dynspec_core::realize::{
    build_certificate, curated_seed, find_norm_elements, find_split_prime, rational_isometry_criterion,
    stable_realizable, verify_certificate, BuildOptions, NormElement, Seed, SplitPrime, SEED_VERSION,
};
use dynspec_core::{
    BigInt, GlueMap, IntPolynomial, Isometry, Lattice, ObstructionReport, RealizationCertificate, SurfaceClass,
};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::docs::*;
use crate::input::{load, load_lattice, load_poly, parse_element};
use crate::{Cli, Command, Format, SearchCaps};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Yes,
    No,
    Inconclusive,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Yes => 0,
            Outcome::No => 1,
            Outcome::Inconclusive => 2,
        }
    }

    fn of(b: bool) -> Self {
        if b {
            Outcome::Yes
        } else {
            Outcome::No
        }
    }
}

pub struct Report {
    pub body: String,
    pub outcome: Outcome,
}

struct Timer {
    on: bool,
    last: Instant,
}

impl Timer {
    fn lap(&mut self, label: &str) {
        if self.on {
            let now = Instant::now();
            eprintln!("timing: {label}: {:.3} ms", (now - self.last).as_secs_f64() * 1e3);
            self.last = now;
        }
    }
}

fn lib<T>(r: dynspec_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn render<T: Serialize>(format: Format, doc: &T, text: impl FnOnce() -> String, outcome: Outcome) -> Report {
    let body = match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => text(),
    };
    Report { body, outcome }
}

fn interval(iv: &Interval) -> String {
    format!("[{}, {}]", format_rational(&iv.lo), format_rational(&iv.hi))
}

fn caps(c: &SearchCaps) -> BuildOptions {
    BuildOptions {
        prime_cap: c.prime_cap,
        box_radius: c.box_radius,
        max_exponent: c.max_exponent,
        ..BuildOptions::default()
    }
}

pub fn run(cli: &Cli) -> Result<Report, String> {
    let mut timer = Timer {
        on: cli.timings,
        last: Instant::now(),
    };
    let fmt = cli.format;
    let report = match &cli.command {
        Command::CertifySalem { poly } => {
            let s = load_poly(poly)?;
            timer.lap("parse");
            let r = match is_salem(&s) {
                Ok(c) => SalemReport {
                    salem: true,
                    certificate: Some(c),
                    rejection: None,
                },
                Err(e) => SalemReport {
                    salem: false,
                    certificate: None,
                    rejection: Some(Rejection {
                        code: e.code().into(),
                        reason: e.to_string(),
                    }),
                },
            };
            timer.lap("is_salem");
            render(fmt, &r, || salem_text(&s, &r), Outcome::of(r.salem))
        }
        Command::Realizable {
            poly,
            class,
            projective,
        } => {
            let s = load_poly(poly)?;
            let d = lib(stable_realizable(&s, (*class).into(), *projective))?;
            timer.lap("decide");
            let text = || {
                format!(
                    "realizable: {}\nclass: {}\nprojective: {}\ndegree: {}\nreason: {}\n",
                    yes_no(d.realizable),
                    d.class,
                    d.projective,
                    d.degree,
                    d.reason
                )
            };
            render(fmt, &d, text, Outcome::of(d.realizable))
        }
        Command::RationalIsometry { poly, lattice } => {
            let s = load_poly(poly)?;
            let l = load_lattice(lattice)?;
            let d = lib(rational_isometry_criterion(&s, &l))?;
            timer.lap("decide");
            let text = || {
                format!(
                    "exists: {}\nhyperbolic kernel: {}\nreason: {}\n",
                    yes_no(d.exists),
                    d.hyperbolic_kernel,
                    d.reason
                )
            };
            render(fmt, &d, text, Outcome::of(d.exists))
        }
        Command::BuildCertificate {
            poly,
            seed,
            class,
            prime_lower_bound,
            square_twist,
            caps: c,
        } => {
            let s = load_poly(poly)?;
            let seed: Seed = match seed {
                Some(p) => {
                    let seed: Seed = load(p)?;
                    if seed.version != SEED_VERSION {
                        return Err(format!("{}: unsupported seed version {}", p.display(), seed.version));
                    }
                    seed
                }
                None => {
                    let class: SurfaceClass = (*class).into();
                    curated_seed(&s, class).ok_or_else(|| format!("no curated {class} seed for {s}; pass --seed"))?
                }
            };
            timer.lap("parse");
            let opts = BuildOptions {
                prime_lower_bound: *prime_lower_bound,
                square_twist: *square_twist,
                ..caps(c)
            };
            let cert = lib(build_certificate(&s, &seed, true, &opts))?;
            timer.lap("build");
            render(fmt, &cert, || certificate_text(&cert), Outcome::Yes)
        }
        Command::Verify { cert } => {
            let c: RealizationCertificate = load(cert)?;
            timer.lap("parse");
            let r = verify_certificate(&c);
            timer.lap("verify");
            let text = || {
                let mut t = format!("verified: {}\n", yes_no(r.verified));
                for i in &r.items {
                    let _ = writeln!(
                        t,
                        "  [{}] {}: {}",
                        if i.passed { "ok" } else { "FAIL" },
                        i.name,
                        i.detail
                    );
                }
                t
            };
            render(fmt, &r, text, Outcome::of(r.verified))
        }
        Command::Positivity {
            isometry,
            orbit_bound,
            search,
        } => {
            let f: Isometry = load(isometry)?;
            timer.lap("parse");
            let opts = PositivityOptions {
                orbit_bound: *orbit_bound as usize,
                always_search: *search,
                ..PositivityOptions::default()
            };
            let r = lib(is_positive_with(&f, &opts))?;
            timer.lap("positivity");
            let outcome = match r.status {
                Status::Positive => Outcome::Yes,
                Status::NotPositive => Outcome::No,
                Status::Inconclusive => Outcome::Inconclusive,
            };
            render(fmt, &r, || positivity_text(&r), outcome)
        }
        Command::Twist {
            isometry,
            element,
            power,
        } => {
            let f: Isometry = load(isometry)?;
            let t = parse_element(element)?;
            let (l, g) = lib(twist(&f, &t.pow(*power)))?;
            timer.lap("twist");
            let doc = TwistDoc {
                element: t,
                power: *power,
                determinant: l.determinant(),
                isometry: g,
            };
            let text = || {
                format!(
                    "element: {}\npower: {}\ndeterminant: {}\ngram:\n{}",
                    doc.element.poly(),
                    doc.power,
                    doc.determinant,
                    rows_text(&l.gram().to_rows())
                )
            };
            render(fmt, &doc, text, Outcome::Yes)
        }
        Command::PowerIntegral { isometry } => {
            let f: Isometry = load(isometry)?;
            let (n, g) = lib(power_to_integral(&f))?;
            timer.lap("power");
            let doc = PowerDoc { power: n, isometry: g };
            let text = || {
                let rows = rational_rows(doc.isometry.matrix());
                format!("power: {n}\nmatrix:\n{}", rows_text(&rows))
            };
            render(fmt, &doc, text, Outcome::Yes)
        }
        Command::TwistSplitCheck {
            isometry,
            exponent,
            prime,
            element,
            prime_lower_bound,
            caps: c,
        } => {
            let f: Isometry = load(isometry)?;
            let s = lib(f.charpoly())?;
            let (sp, ne) = twist_split_inputs(&f, &s, *prime, element.as_deref(), *prime_lower_bound, c)?;
            timer.lap("search");
            let p = match &sp {
                Some(sp) => BigInt::from(sp.prime),
                None => lib(ne.t.norm(&s))?,
            };
            let r = lib(twist_split_certificate(&f, &ne.t, *exponent, &p))?;
            timer.lap("check");
            let doc = TwistSplitDoc::new(r, sp, ne);
            let text = || {
                format!(
                    "passed: {}\nprime: {}\nexponent: {}\nelement: {}\ndeterminant: {}\np-valuation: {}\nhyperbolic p-part: {}\n",
                    yes_no(doc.passed),
                    doc.prime,
                    doc.exponent,
                    doc.element.t.poly(),
                    doc.determinant,
                    doc.p_valuation,
                    doc.hyperbolic
                )
            };
            render(fmt, &doc, text, Outcome::of(doc.passed))
        }
        Command::Lattice { lattice } => {
            let l = load_lattice(lattice)?;
            let info = LatticeInfo {
                determinant: l.determinant(),
                signature: l.signature(),
                even: l.is_even(),
                unimodular: l.is_unimodular(),
                discriminant_form: if l.is_even() {
                    Some(lib(l.discriminant_form())?)
                } else {
                    None
                },
                lattice: l,
            };
            timer.lap("invariants");
            render(fmt, &info, || lattice_text(&info), Outcome::Yes)
        }
        Command::Glue { first, second } => {
            let m = load_lattice(first)?;
            let n = load_lattice(second)?;
            let (qm, qn) = (lib(m.discriminant_form())?, lib(n.discriminant_form())?);
            let doc = match lib(GlueMap::find(&qm, &qn))? {
                Some(phi) => {
                    let ov = lib(Lattice::glue_with_basis(&m, &n, &phi))?;
                    GlueDoc {
                        glued: true,
                        glue_map: Some(phi),
                        overlattice: Some(ov.lattice),
                        basis: Some(rational_rows(&ov.basis)),
                    }
                }
                None => GlueDoc {
                    glued: false,
                    glue_map: None,
                    overlattice: None,
                    basis: None,
                },
            };
            timer.lap("glue");
            let text = || match &doc.overlattice {
                Some(l) => {
                    let (a, b) = l.signature();
                    format!(
                        "glued: yes\nrank: {}\ndeterminant: {}\nsignature: ({a}, {b})\neven: {}\ngram:\n{}",
                        l.rank(),
                        l.determinant(),
                        l.is_even(),
                        rows_text(&l.gram().to_rows())
                    )
                }
                None => "glued: no (discriminant forms are not anti-isometric)\n".into(),
            };
            render(fmt, &doc, text, Outcome::of(doc.glued))
        }
    };
    Ok(report)
}

fn twist_split_inputs(
    f: &Isometry,
    s: &IntPolynomial,
    prime: Option<u64>,
    element: Option<&str>,
    lower: u64,
    c: &SearchCaps,
) -> Result<(Option<SplitPrime>, NormElement), String> {
    if let Some(e) = element {
        let t = parse_element(e)?;
        let n = lib(t.norm(s))?;
        if let Some(p) = prime {
            if n != BigInt::from(p) {
                return Err(format!("--element has norm {n}, not {p}"));
            }
        }
        return Ok((None, NormElement { t, exponent: 1 }));
    }
    let det = f.lattice().determinant();
    let sp = match prime {
        Some(p) => {
            let sp = lib(find_split_prime(s, &BigInt::one(), p.saturating_sub(1), p))
                .map_err(|_| format!("{p} is not a split prime congruent to 1 mod 8 for {s}"))?;
            if (&det % BigInt::from(p)).is_zero() {
                return Err(format!("{p} divides det L = {det}"));
            }
            sp
        }
        None => {
            let mut lb = lower;
            loop {
                let sp = lib(find_split_prime(s, &BigInt::one(), lb, c.prime_cap))?;
                if !(&det % BigInt::from(sp.prime)).is_zero() {
                    break sp;
                }
                lb = sp.prime;
            }
        }
    };
    let ne = lib(find_norm_elements(s, &sp, 1, c.box_radius, 1))?.remove(0);
    Ok((Some(sp), ne))
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn rows_text<T: ToString>(rows: &[Vec<T>]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect()).collect();
    let w = cells.iter().flatten().map(|c| c.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in &cells {
        let line: Vec<String> = r.iter().map(|c| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "  {}", line.join(" "));
    }
    out
}

fn salem_text(s: &IntPolynomial, r: &SalemReport) -> String {
    match (&r.certificate, &r.rejection) {
        (Some(c), _) => format!(
            "salem: yes\npolynomial: {s}\ndegree: {}\ntrace polynomial: {}\nlambda in {}\nlambda + 1/lambda in {}\n",
            c.degree,
            c.trace_polynomial,
            interval(&c.lambda),
            interval(&c.trace_root)
        ),
        (_, Some(e)) => format!("salem: no\npolynomial: {s}\nreason: {} ({})\n", e.reason, e.code),
        _ => unreachable!(),
    }
}

fn positivity_text(r: &ObstructionReport) -> String {
    let status = serde_json::to_value(r.status).expect("status");
    let method = serde_json::to_value(r.method).expect("method");
    let mut t = format!(
        "status: {}\nmethod: {}\ndeterminant: {}\n",
        status.as_str().unwrap_or_default(),
        method.as_str().unwrap_or_default(),
        r.determinant
    );
    if let Some(th) = &r.determinant_threshold {
        let _ = writeln!(t, "threshold 4|disc s|: {th}");
    }
    if let Some(b) = &r.search {
        let _ = writeln!(
            t,
            "search: bound {}, {} candidates, {} roots",
            format_rational(&b.bound),
            b.candidates,
            b.roots
        );
    }
    for w in &r.witnesses {
        let root: Vec<String> = w.root.iter().map(|c| c.to_string()).collect();
        let kind = serde_json::to_value(w.kind).expect("kind");
        let _ = writeln!(
            t,
            "witness ({}): ({})",
            kind.as_str().unwrap_or_default(),
            root.join(", ")
        );
    }
    t
}

fn lattice_text(i: &LatticeInfo) -> String {
    let (a, b) = i.signature;
    let mut t = format!(
        "rank: {}\ndeterminant: {}\nsignature: ({a}, {b})\neven: {}\nunimodular: {}\n",
        i.lattice.rank(),
        i.determinant,
        i.even,
        i.unimodular
    );
    if let Some(q) = &i.discriminant_form {
        let orders: Vec<String> = q.orders().iter().map(|o| o.to_string()).collect();
        let qs: Vec<String> = q.q_values().iter().map(format_rational).collect();
        let _ = writeln!(t, "discriminant group: [{}]", orders.join(", "));
        let _ = writeln!(t, "q on generators: [{}]", qs.join(", "));
    }
    t
}

fn certificate_text(c: &RealizationCertificate) -> String {
    let factors: Vec<String> = c
        .charpoly
        .iter()
        .map(|f| {
            if f.multiplicity == 1 {
                format!("({})", f.poly)
            } else {
                format!("({})^{}", f.poly, f.multiplicity)
            }
        })
        .collect();
    let (a, b) = c.kernel.signature;
    let mut t = format!(
        "class: {}\nprojective: {}\nsalem: {}\npower: {}\ncharacteristic polynomial: {}\nkernel signature: ({a}, {b})\n",
        c.class,
        c.projective,
        c.salem,
        c.power,
        factors.join(" ")
    );
    if let Some(g) = &c.glue {
        if let (Some(sp), Some(ne)) = (&g.split_prime, &g.norm_element) {
            let _ = writeln!(
                t,
                "twist: p = {}, t = {}, N(t) = p^{}, exponent {}",
                sp.prime,
                ne.t.poly(),
                ne.exponent,
                g.twist_power.unwrap_or(2)
            );
        }
    }
    if let Some(p) = &c.positivity {
        let status = serde_json::to_value(p.report.status).expect("status");
        let _ = writeln!(t, "positivity: {}", status.as_str().unwrap_or_default());
    }
    if let Some(m) = c.mod2_trivial {
        let _ = writeln!(t, "trivial mod 2: {m}");
    }
    t
}
