//! The classification layer: builds the parametrized groups G_{m,n}, derives
//! (m, n) from quadratic class numbers, places each group in the descendant
//! tree, predicts full Artin patterns, and renders the symbolic three-stage
//! classifiers.
//!
//! G_{m,n} is presented on (rho, sigma, tau) with relative orders
//! (2, 2^(n+1), 2^(m+1)), rho^2 = sigma^(2^n), and rho inverting sigma and
//! tau; the order is 2^(m+n+3). The parameters come from the 2-class numbers
//! h2 = 2^(m+1) of Q(sqrt(-p1)) and 2^n of Q(sqrt(-p2 q)).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::arith::RadicandProfile;
use crate::artin::{self, ArtinPattern, KernelCode};
use crate::pcgroup::{AbelianInvariants, Group, PcError, PcPresentation, Word};
use crate::quadclass;

#[derive(Debug, Error)]
pub enum TowerError {
    #[error("parameters must satisfy m >= 1 and n >= 1, got ({0}, {1})")]
    BadParams(u32, u32),
    #[error(transparent)]
    Pc(#[from] PcError),
    #[error(transparent)]
    Quad(#[from] quadclass::QuadError),
    #[error("violated hypothesis: {0}")]
    Hypothesis(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
    #[error("three-stage parameter u must be at least 2, got {0}")]
    BadU(u32),
    #[error("variant {variant} is not available for {family}; choose one of {allowed:?}")]
    BadVariant {
        family: String,
        variant: u32,
        allowed: &'static [u32],
    },
}

/// The pair (m, n), both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TowerParams {
    pub m: u32,
    pub n: u32,
}

impl TowerParams {
    pub fn new(m: u32, n: u32) -> Result<Self, TowerError> {
        if m < 1 || n < 1 {
            return Err(TowerError::BadParams(m, n));
        }
        Ok(TowerParams { m, n })
    }
}

/// Normalized pc presentation of G_{m,n}.
pub fn build_presentation(m: u32, n: u32) -> Result<PcPresentation, TowerError> {
    TowerParams::new(m, n)?;
    let sigma_order = 1u64 << (n + 1);
    let tau_order = 1u64 << (m + 1);
    let mut p = PcPresentation::new(2, vec![2, sigma_order, tau_order]);
    p.set_power(0, Word::single(1, 1 << n)); // rho^2 = sigma^(2^n)
    p.set_conjugate(0, 1, Word::single(1, sigma_order - 1)); // sigma^rho = sigma^-1
    p.set_conjugate(0, 2, Word::single(2, tau_order - 1)); // tau^rho = tau^-1
    Ok(p)
}

/// Construct G_{m,n} and insist on a consistent presentation; a failure here
/// means the normalization is broken, not a bad input.
pub fn build_group(m: u32, n: u32) -> Result<Arc<Group>, TowerError> {
    let group = Group::from_presentation(build_presentation(m, n)?)?;
    if !group.consistency_check() {
        return Err(TowerError::Internal(format!(
            "presentation of G_({},{}) failed its consistency check",
            m, n
        )));
    }
    Ok(group)
}

fn log2_exact(x: u64, what: &str) -> Result<u32, TowerError> {
    if !x.is_power_of_two() {
        return Err(TowerError::Hypothesis(format!(
            "{} = {} is not a power of two",
            what, x
        )));
    }
    Ok(x.trailing_zeros())
}

/// (m, n) from the 2-class numbers of the two auxiliary quadratic fields.
pub fn params_from_radicand(profile: &RadicandProfile) -> Result<TowerParams, TowerError> {
    let h2_1 = quadclass::two_class_number(-(profile.p1 as i64))?;
    let h2_2 = quadclass::two_class_number(-((profile.p2 * profile.q) as i64))?;
    let e1 = log2_exact(h2_1, "h2(Q(sqrt(-p1)))")?;
    let n = log2_exact(h2_2, "h2(Q(sqrt(-p2 q)))")?;
    if e1 < 2 || n < 1 {
        return Err(TowerError::Hypothesis(format!(
            "class numbers 2^{} and 2^{} leave no admissible (m, n)",
            e1, n
        )));
    }
    TowerParams::new(e1 - 1, n)
}

/// Which periodic family the vertex lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFamily {
    /// mainline of the coclass tree under <32,35> (n = 1)
    Mainline35,
    /// mainline reached from <32,34> by n-2 bifurcation steps (m >= n >= 2)
    Mainline34,
    /// periodic coclass sequence V reached from <32,34> (n > m >= 1)
    SequenceV,
}

/// Symbolic vertex position with its descendant-path label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreePosition {
    pub family: TreeFamily,
    pub j: u32,
    pub k: u32,
}

fn block(step: &str, e: u32) -> String {
    if e == 0 {
        String::new()
    } else {
        format!("({})^{}", step, e)
    }
}

impl TreePosition {
    pub fn label(&self) -> String {
        match self.family {
            TreeFamily::Mainline35 => format!("<32,35>{}", block("-#1;1", self.k)),
            TreeFamily::Mainline34 => format!(
                "<32,34>{}-#2;2{}",
                block("-#2;1", self.j),
                block("-#1;1", self.k)
            ),
            TreeFamily::SequenceV => format!(
                "<32,34>{}{}-#1;2",
                block("-#2;1", self.j),
                block("-#1;1", self.k)
            ),
        }
    }

    /// Formal vertex identifier: M_{0,k} on the <32,35> mainline, M_{j+1,k}
    /// on the bifurcated mainlines, V_{j,k} on the periodic sequences.
    pub fn vertex_name(&self) -> String {
        match self.family {
            TreeFamily::Mainline35 => format!("M_{{0,{}}}", self.k),
            TreeFamily::Mainline34 => format!("M_{{{},{}}}", self.j + 1, self.k),
            TreeFamily::SequenceV => format!("V_{{{},{}}}", self.j, self.k),
        }
    }
}

impl fmt::Display for TreePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.vertex_name(), self.label())
    }
}

/// Position of G_{m,n} in the descendant tree; total and injective on the
/// parameter quadrant.
pub fn tree_position(params: TowerParams) -> TreePosition {
    let (m, n) = (params.m, params.n);
    if n == 1 {
        TreePosition {
            family: TreeFamily::Mainline35,
            j: 0,
            k: m - 1,
        }
    } else if m >= n {
        TreePosition {
            family: TreeFamily::Mainline34,
            j: n - 2,
            k: m - n,
        }
    } else {
        TreePosition {
            family: TreeFamily::SequenceV,
            j: m - 1,
            k: n - m - 1,
        }
    }
}

fn inv(parts: &[u32]) -> AbelianInvariants {
    let mut v: Vec<u32> = parts.iter().copied().filter(|&e| e > 0).collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    AbelianInvariants(v)
}

/// Predicted Artin pattern of G_{m,n}. The layer-1 kernel codes follow the
/// ordering of the seven field extensions used by arithmetic sources, which
/// is not the canonical subgroup order; callers compare multisets and cycle
/// structure, not positions.
pub fn predicted_pattern2(params: TowerParams) -> ArtinPattern {
    let (m, n) = (params.m, params.n);
    let tau0 = vec![inv(&[1, 1, 1])];
    let tau1 = if n == 1 {
        vec![
            inv(&[m + 1, 2]),
            inv(&[2, 1]),
            inv(&[2, 1]),
            inv(&[1, 1, 1]),
            inv(&[1, 1, 1]),
            inv(&[2, 1]),
            inv(&[2, 1]),
        ]
    } else {
        let mut v = vec![inv(&[m + 1, n + 1])];
        v.extend(std::iter::repeat_n(inv(&[1, 1, 1]), 6));
        v
    };
    let tau2 = if n == 1 {
        let mut v = vec![inv(&[m + 1, 1]), inv(&[m, 2]), inv(&[m + 1, 1])];
        v.extend(std::iter::repeat_n(inv(&[2, 1]), 4));
        v
    } else {
        let mut v = vec![
            inv(&[m + 1, n]),
            inv(&[m, n + 1]),
            inv(&[(m + 1).max(n + 1), m.min(n)]),
        ];
        v.extend(std::iter::repeat_n(inv(&[1, 1, 1]), 4));
        v
    };
    let tau3 = vec![inv(&[m, n])];
    let kappa1: Vec<KernelCode> = if n == 1 {
        [1, 2, 3, 5, 4, 6, 7]
    } else {
        [1, 3, 2, 5, 4, 7, 6]
    }
    .iter()
    .map(|&k| KernelCode::AtLayer1(k))
    .collect();
    ArtinPattern {
        prime: 2,
        ttt: vec![tau0, tau1, tau2, tau3],
        tkt: vec![
            vec![KernelCode::Trivial],
            kappa1,
            vec![KernelCode::Total; 7],
            vec![KernelCode::Total],
        ],
    }
}

/// Outcome of holding one computed pattern against its prediction.
#[derive(Debug, Clone)]
pub struct CellReport {
    pub m: u32,
    pub n: u32,
    pub pass: bool,
    pub diffs: Vec<String>,
}

fn multiset(v: &[AbelianInvariants]) -> Vec<AbelianInvariants> {
    let mut s = v.to_vec();
    s.sort();
    s
}

/// Layerwise comparison: tau0 and tau3 exactly, tau1 and tau2 as unordered
/// multisets plus the polarized component, kappa2 and kappa3 total, kappa1
/// by cycle structure.
pub fn compare_patterns(
    params: TowerParams,
    computed: &ArtinPattern,
    predicted: &ArtinPattern,
) -> CellReport {
    let (m, n) = (params.m, params.n);
    let mut diffs = Vec::new();
    if computed.ttt.len() != 4 {
        diffs.push(format!("expected 4 layers, computed {}", computed.ttt.len()));
        return CellReport {
            m,
            n,
            pass: false,
            diffs,
        };
    }
    if computed.ttt[0] != predicted.ttt[0] {
        diffs.push(format!(
            "tau0: computed {:?}, predicted {:?}",
            computed.ttt[0], predicted.ttt[0]
        ));
    }
    if computed.ttt[3] != predicted.ttt[3] {
        diffs.push(format!(
            "tau3: computed {:?}, predicted {:?}",
            computed.ttt[3], predicted.ttt[3]
        ));
    }
    for layer in [1usize, 2] {
        if multiset(&computed.ttt[layer]) != multiset(&predicted.ttt[layer]) {
            diffs.push(format!(
                "tau{} multisets differ: computed {:?}, predicted {:?}",
                layer,
                multiset(&computed.ttt[layer]),
                multiset(&predicted.ttt[layer])
            ));
        }
    }
    let polarized = inv(&[m + 1, n + 1]);
    let count = computed.ttt[1].iter().filter(|&t| *t == polarized).count();
    if count != 1 {
        diffs.push(format!(
            "polarized tau1 component {} occurs {} times, expected once",
            polarized, count
        ));
    }
    if computed.tkt[0] != vec![KernelCode::Trivial] {
        diffs.push(format!("kappa0 is {:?}, expected trivial", computed.tkt[0]));
    }
    if computed.tkt[2] != vec![KernelCode::Total; 7] {
        diffs.push(format!("kappa2 is {:?}, expected (0^7)", computed.tkt[2]));
    }
    if computed.tkt[3] != vec![KernelCode::Total] {
        diffs.push(format!("kappa3 is {:?}, expected (0)", computed.tkt[3]));
    }
    match artin::cycle_structure(&computed.tkt[1]) {
        Some(cs) if cs.is_permutation => {
            let expected = if n == 1 { (5, 1) } else { (1, 3) };
            if (cs.fixed_points, cs.two_cycles) != expected {
                diffs.push(format!(
                    "kappa1 cycle structure {:?}, expected {:?}",
                    (cs.fixed_points, cs.two_cycles),
                    expected
                ));
            }
        }
        _ => diffs.push("kappa1 is not a permutation of the first layer".to_string()),
    }
    CellReport {
        m,
        n,
        pass: diffs.is_empty(),
        diffs,
    }
}

/// Build G_{m,n}, compute its pattern, compare with the prediction.
pub fn verify_cell(m: u32, n: u32) -> Result<CellReport, TowerError> {
    let params = TowerParams::new(m, n)?;
    let group = build_group(m, n)?;
    let computed =
        artin::artin_pattern(&group).map_err(|e| TowerError::Internal(e.to_string()))?;
    let predicted = predicted_pattern2(params);
    Ok(compare_patterns(params, &computed, &predicted))
}

/// The full verification box 1..=m_max x 1..=n_max, cells in parallel.
pub fn verify_box(m_max: u32, n_max: u32) -> Result<Vec<CellReport>, TowerError> {
    // Guard the largest cell up front so the error is immediate.
    build_presentation(m_max.max(1), n_max.max(1))
        .and_then(|p| Group::from_presentation(p).map_err(TowerError::from))?;
    let cells: Vec<(u32, u32)> = (1..=m_max)
        .flat_map(|m| (1..=n_max).map(move |n| (m, n)))
        .collect();
    let mut reports = cells
        .into_par_iter()
        .map(|(m, n)| verify_cell(m, n))
        .collect::<Result<Vec<_>, _>>()?;
    reports.sort_by_key(|r| (r.m, r.n));
    Ok(reports)
}

// ---- three-stage symbolic classifiers ----

/// The two families of three-stage tower groups, named by their transfer
/// kernel types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeStageFamily {
    E6E14,
    E8E9,
}

impl ThreeStageFamily {
    pub fn root(&self) -> (u32, u32) {
        match self {
            ThreeStageFamily::E6E14 => (729, 49),
            ThreeStageFamily::E8E9 => (729, 54),
        }
    }

    pub fn variants(&self) -> &'static [u32] {
        match self {
            ThreeStageFamily::E6E14 => &[4, 5, 6],
            ThreeStageFamily::E8E9 => &[2, 4, 6],
        }
    }

    /// The first variant digit carries the first kernel type of the family,
    /// the remaining two the second (one vertex realizes E.6 resp. E.8, two
    /// vertices realize E.14 resp. E.9).
    fn tkt_digits(&self, variant: u32) -> [u32; 4] {
        match (self, variant) {
            (ThreeStageFamily::E6E14, 4) => [1, 1, 2, 2], // E.6
            (ThreeStageFamily::E6E14, _) => [3, 1, 2, 2], // E.14
            (ThreeStageFamily::E8E9, 2) => [2, 2, 3, 4],  // E.8
            (ThreeStageFamily::E8E9, _) => [2, 3, 3, 4],  // E.9
        }
    }

    pub fn parse(s: &str) -> Option<ThreeStageFamily> {
        match s.to_ascii_uppercase().as_str() {
            "E6" | "E14" | "E6-E14" | "E6E14" => Some(ThreeStageFamily::E6E14),
            "E8" | "E9" | "E8-E9" | "E8E9" => Some(ThreeStageFamily::E8E9),
            _ => None,
        }
    }
}

impl fmt::Display for ThreeStageFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThreeStageFamily::E6E14 => write!(f, "E6-E14"),
            ThreeStageFamily::E8E9 => write!(f, "E8-E9"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreeStageParams {
    pub u: u32,
    pub family: ThreeStageFamily,
    pub variant: u32,
}

impl ThreeStageParams {
    pub fn new(u: u32, family: ThreeStageFamily, variant: u32) -> Result<Self, TowerError> {
        if u < 2 {
            return Err(TowerError::BadU(u));
        }
        if !family.variants().contains(&variant) {
            return Err(TowerError::BadVariant {
                family: family.to_string(),
                variant,
                allowed: family.variants(),
            });
        }
        Ok(ThreeStageParams { u, family, variant })
    }
}

/// Labels of the three-stage tower group G and its metabelianization G/G'',
/// with j = k = u - 2. The two labels differ exactly by the substitution
/// (-#2;1-#1;1) -> (-#1;1-#1;1) and the terminal #2 -> #1.
pub fn three_stage_identifiers(params: &ThreeStageParams) -> (String, String) {
    let (order, id) = params.family.root();
    let j = params.u - 2;
    let group = format!(
        "<{},{}>{}-#2;{}",
        order,
        id,
        block("-#2;1-#1;1", j),
        params.variant
    );
    let meta = format!(
        "<{},{}>{}-#1;{}",
        order,
        id,
        block("-#1;1-#1;1", j),
        params.variant
    );
    (group, meta)
}

/// Predicted Artin pattern of the three-stage groups: tau0 = (1,1),
/// tau1 with the polarized component (u+1, u) in the family's slot,
/// tau2 = (u,u,1), total kernel at the bottom layer.
pub fn predicted_pattern3(params: &ThreeStageParams) -> ArtinPattern {
    let u = params.u;
    let tau1 = match params.family {
        ThreeStageFamily::E6E14 => vec![
            inv(&[u + 1, u]),
            inv(&[1, 1, 1]),
            inv(&[2, 1]),
            inv(&[2, 1]),
        ],
        ThreeStageFamily::E8E9 => vec![
            inv(&[2, 1]),
            inv(&[u + 1, u]),
            inv(&[2, 1]),
            inv(&[2, 1]),
        ],
    };
    let kappa1 = params
        .family
        .tkt_digits(params.variant)
        .iter()
        .map(|&d| KernelCode::AtLayer1(d))
        .collect();
    ArtinPattern {
        prime: 3,
        ttt: vec![vec![inv(&[1, 1])], tau1, vec![inv(&[u, u, 1])]],
        tkt: vec![
            vec![KernelCode::Trivial],
            kappa1,
            vec![KernelCode::Total],
        ],
    }
}

/// Parser and renderer for the descendant-path label grammar:
/// `<order,id>` followed by bare steps `-#s;i` and parenthesized repeated
/// blocks `(-#s;i...)^e`.
pub mod label {
    use std::fmt;

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub enum PathItem {
        Step { s: u64, i: u64 },
        Block { steps: Vec<(u64, u64)>, exp: u64 },
    }

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct DescendantLabel {
        pub root: (u64, u64),
        pub items: Vec<PathItem>,
    }

    impl fmt::Display for DescendantLabel {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "<{},{}>", self.root.0, self.root.1)?;
            for item in &self.items {
                match item {
                    PathItem::Step { s, i } => write!(f, "-#{};{}", s, i)?,
                    PathItem::Block { steps, exp } => {
                        write!(f, "(")?;
                        for (s, i) in steps {
                            write!(f, "-#{};{}", s, i)?;
                        }
                        write!(f, ")^{}", exp)?;
                    }
                }
            }
            Ok(())
        }
    }

    struct Cursor<'a> {
        s: &'a [u8],
        pos: usize,
    }

    impl<'a> Cursor<'a> {
        fn peek(&self) -> Option<u8> {
            self.s.get(self.pos).copied()
        }

        fn eat(&mut self, c: u8) -> Result<(), String> {
            if self.peek() == Some(c) {
                self.pos += 1;
                Ok(())
            } else {
                Err(format!(
                    "expected {:?} at offset {}",
                    c as char, self.pos
                ))
            }
        }

        fn number(&mut self) -> Result<u64, String> {
            let start = self.pos;
            while matches!(self.peek(), Some(b'0'..=b'9')) {
                self.pos += 1;
            }
            if self.pos == start {
                return Err(format!("expected a number at offset {}", start));
            }
            std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|e| format!("{}", e))
        }

        fn step(&mut self) -> Result<(u64, u64), String> {
            self.eat(b'-')?;
            self.eat(b'#')?;
            let s = self.number()?;
            self.eat(b';')?;
            let i = self.number()?;
            Ok((s, i))
        }
    }

    pub fn parse(text: &str) -> Result<DescendantLabel, String> {
        let mut c = Cursor {
            s: text.as_bytes(),
            pos: 0,
        };
        c.eat(b'<')?;
        let order = c.number()?;
        c.eat(b',')?;
        let id = c.number()?;
        c.eat(b'>')?;
        let mut items = Vec::new();
        loop {
            match c.peek() {
                None => break,
                Some(b'-') => {
                    let (s, i) = c.step()?;
                    items.push(PathItem::Step { s, i });
                }
                Some(b'(') => {
                    c.eat(b'(')?;
                    let mut steps = Vec::new();
                    while c.peek() == Some(b'-') {
                        steps.push(c.step()?);
                    }
                    if steps.is_empty() {
                        return Err("empty step block".to_string());
                    }
                    c.eat(b')')?;
                    c.eat(b'^')?;
                    let exp = c.number()?;
                    items.push(PathItem::Block { steps, exp });
                }
                Some(other) => {
                    return Err(format!(
                        "unexpected {:?} at offset {}",
                        other as char, c.pos
                    ))
                }
            }
        }
        Ok(DescendantLabel {
            root: (order, id),
            items,
        })
    }
}
