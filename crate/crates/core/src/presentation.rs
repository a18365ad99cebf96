//! Finite relative presentations `⟨X ⊔ 𝓗 | 𝓡 ⊔ 𝓠⟩`: the document format,
//! validation, and the derived data `Ω` and `M`.
//!
//! The short peripheral relations `𝓠` are never stored; they are answered by
//! peripheral multiplication.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::oracle::OracleGroup;
use crate::words::{self, Letter, Word};

/// A finite peripheral subgroup given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableGroup {
    names: Vec<String>,
    identity: u32,
    table: Vec<Vec<u32>>,
    inverses: Vec<u32>,
}

impl TableGroup {
    /// Validates the group axioms. `peripheral` only names the group in errors.
    pub fn new(peripheral: &str, names: Vec<String>, identity: &str, table: Vec<Vec<usize>>) -> Result<Self> {
        let not_group = |witness: String| Error::TableNotAGroup {
            peripheral: peripheral.to_string(),
            witness,
        };
        let n = names.len();
        if n == 0 {
            return Err(not_group("no elements".into()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            check_identifier(name, &format!("element of `{peripheral}`"))?;
            if !seen.insert(name) {
                return Err(Error::DuplicateName(format!("{peripheral}:{name}")));
            }
        }
        let e = names
            .iter()
            .position(|x| x == identity)
            .ok_or_else(|| not_group(format!("identity `{identity}` is not an element")))?;
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(not_group(format!("table is not {n}x{n}")));
        }
        for (i, row) in table.iter().enumerate() {
            if let Some(&bad) = row.iter().find(|&&v| v >= n) {
                return Err(not_group(format!("entry {bad} in row {i} is out of range")));
            }
        }
        for i in 0..n {
            if table[e][i] != i || table[i][e] != i {
                return Err(not_group(format!(
                    "identity row/column fails at `{}`",
                    names[i]
                )));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(not_group(format!(
                            "associativity fails on ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == e && table[b][a] == e) {
                Some(b) => inverses.push(b as u32),
                None => {
                    return Err(not_group(format!("`{}` has no inverse", names[a])));
                }
            }
        }
        Ok(TableGroup {
            names,
            identity: e as u32,
            table: table
                .into_iter()
                .map(|row| row.into_iter().map(|v| v as u32).collect())
                .collect(),
            inverses,
        })
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn multiply(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize][b as usize]
    }

    pub fn inverse(&self, a: u32) -> u32 {
        self.inverses[a as usize]
    }

    pub fn index_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|x| x == name).map(|i| i as u32)
    }

    fn raw_table(&self) -> Vec<Vec<usize>> {
        self.table
            .iter()
            .map(|row| row.iter().map(|&v| v as usize).collect())
            .collect()
    }
}

#[derive(Debug)]
pub enum PeripheralGroup {
    Table(TableGroup),
    Oracle(OracleGroup),
}

/// One peripheral subgroup `H_λ`.
#[derive(Debug)]
pub struct Peripheral {
    pub name: String,
    pub group: PeripheralGroup,
}

impl Peripheral {
    pub fn identity(&self) -> u32 {
        match &self.group {
            PeripheralGroup::Table(t) => t.identity(),
            PeripheralGroup::Oracle(_) => 0,
        }
    }

    pub fn multiply(&self, a: u32, b: u32) -> Result<u32> {
        match &self.group {
            PeripheralGroup::Table(t) => Ok(t.multiply(a, b)),
            PeripheralGroup::Oracle(o) => o.multiply(a, b),
        }
    }

    pub fn inverse(&self, a: u32) -> Result<u32> {
        match &self.group {
            PeripheralGroup::Table(t) => Ok(t.inverse(a)),
            PeripheralGroup::Oracle(o) => o.inverse(a),
        }
    }

    pub fn table(&self) -> Option<&TableGroup> {
        match &self.group {
            PeripheralGroup::Table(t) => Some(t),
            PeripheralGroup::Oracle(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.table().is_some()
    }

    /// Every nontrivial element, for table peripherals.
    pub fn nontrivial_elements(&self) -> Option<Vec<u32>> {
        self.table().map(|t| {
            (0..t.order() as u32)
                .filter(|&i| i != t.identity())
                .collect()
        })
    }

    pub fn element_name(&self, e: u32) -> String {
        match &self.group {
            PeripheralGroup::Table(t) => t.names()[e as usize].clone(),
            PeripheralGroup::Oracle(o) => o.format(&o.word_of(e), "."),
        }
    }

    fn parse_element(&self, text: &str, context: &str) -> Result<u32> {
        let unknown = || Error::UnknownLetter {
            context: context.to_string(),
            token: format!("{}:{}", self.name, text),
        };
        match &self.group {
            PeripheralGroup::Table(t) => {
                let (name, inv) = match text.strip_suffix("^-1") {
                    Some(n) => (n, true),
                    None => (text, false),
                };
                let mut e = t.index_of(name).ok_or_else(unknown)?;
                if inv {
                    e = t.inverse(e);
                }
                if e == t.identity() {
                    return Err(unknown());
                }
                Ok(e)
            }
            PeripheralGroup::Oracle(o) => {
                let w = o.parse(text, '.').map_err(|_| unknown())?;
                let e = o.intern(w)?;
                if e == 0 {
                    return Err(unknown());
                }
                Ok(e)
            }
        }
    }

    fn same_spec(&self, other: &Peripheral) -> bool {
        self.name == other.name
            && match (&self.group, &other.group) {
                (PeripheralGroup::Table(a), PeripheralGroup::Table(b)) => a == b,
                (PeripheralGroup::Oracle(a), PeripheralGroup::Oracle(b)) => {
                    a.generators() == b.generators()
                        && a.command() == b.command()
                        && a.has_normal_form() == b.has_normal_form()
                }
                _ => false,
            }
    }
}

/// User-certified constants: the relative isoperimetric constant `C`, the
/// isoperimetric constant `C′`, and the hyperbolicity constant `δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedConstants {
    #[serde(rename = "C")]
    pub c: u64,
    #[serde(rename = "Cprime")]
    pub c_prime: u64,
    pub delta: u64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

/// Where the exact finite model for a presentation lives.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelRef {
    Path(String),
    Inline(Value),
}

#[derive(Debug)]
pub struct Presentation {
    pub name: String,
    x: Vec<String>,
    peripherals: Vec<Peripheral>,
    relators: Vec<Word>,
    constants: Option<CertifiedConstants>,
    model: Option<ModelRef>,
}

impl PartialEq for Presentation {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.x == other.x
            && self.peripherals.len() == other.peripherals.len()
            && self
                .peripherals
                .iter()
                .zip(&other.peripherals)
                .all(|(a, b)| a.same_spec(b))
            && self.format_relators() == other.format_relators()
            && self.constants == other.constants
            && self.model == other.model
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CommandDoc {
    Line(String),
    Argv(Vec<String>),
}

#[derive(Serialize, Deserialize)]
struct PeripheralDoc {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    elements: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    identity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    command: Option<CommandDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    normal_form: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PresentationDoc {
    name: String,
    #[serde(default)]
    x: Vec<String>,
    #[serde(default)]
    peripherals: Vec<PeripheralDoc>,
    #[serde(default)]
    relators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constants: Option<CertifiedConstants>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<Value>,
}

fn check_identifier(name: &str, what: &str) -> Result<()> {
    if name.is_empty()
        || name.chars().any(|c| c.is_whitespace() || c == ':' || c == '^')
    {
        return Err(Error::syntax(what, format!("`{name}` is not a valid identifier")));
    }
    Ok(())
}

/// Parses and validates a presentation document. A `model` given as a path is
/// kept unresolved; use [`load_presentation`] to resolve it against the
/// document's directory.
pub fn parse_presentation(document: &str) -> Result<Presentation> {
    let doc: PresentationDoc = serde_json::from_str(document).map_err(|e| {
        Error::syntax(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    from_doc(doc)
}

pub fn load_presentation(path: impl AsRef<Path>) -> Result<Presentation> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let mut p = parse_presentation(&text)?;
    if let Some(ModelRef::Path(rel)) = &p.model {
        let full = path.parent().unwrap_or(Path::new(".")).join(rel);
        let model_text = std::fs::read_to_string(&full)?;
        let v: Value = serde_json::from_str(&model_text).map_err(|e| {
            Error::syntax(
                format!("{} line {} column {}", full.display(), e.line(), e.column()),
                e.to_string(),
            )
        })?;
        p.model = Some(ModelRef::Inline(v));
    }
    Ok(p)
}

fn from_doc(doc: PresentationDoc) -> Result<Presentation> {
    let mut names = HashSet::new();
    for x in &doc.x {
        check_identifier(x, "x")?;
        if !names.insert(x.clone()) {
            return Err(Error::DuplicateName(x.clone()));
        }
    }
    let mut peripherals = Vec::with_capacity(doc.peripherals.len());
    for (i, pd) in doc.peripherals.into_iter().enumerate() {
        check_identifier(&pd.name, &format!("peripherals[{i}]"))?;
        if !names.insert(pd.name.clone()) {
            return Err(Error::DuplicateName(pd.name.clone()));
        }
        let location = format!("peripherals[{i}]");
        let group = match pd.kind.as_str() {
            "finite-table" => {
                let missing = |f: &str| Error::syntax(&location, format!("finite-table peripheral needs `{f}`"));
                let elements = pd.elements.ok_or_else(|| missing("elements"))?;
                let identity = pd.identity.ok_or_else(|| missing("identity"))?;
                let table = pd.table.ok_or_else(|| missing("table"))?;
                PeripheralGroup::Table(TableGroup::new(&pd.name, elements, &identity, table)?)
            }
            "oracle" => {
                let generators = pd
                    .generators
                    .ok_or_else(|| Error::syntax(&location, "oracle peripheral needs `generators`"))?;
                let mut seen = HashSet::new();
                for g in &generators {
                    check_identifier(g, &location)?;
                    if g.contains('.') {
                        return Err(Error::syntax(&location, format!("generator `{g}` contains `.`")));
                    }
                    if !seen.insert(g) {
                        return Err(Error::DuplicateName(format!("{}:{g}", pd.name)));
                    }
                }
                let command = match pd.command {
                    Some(CommandDoc::Line(s)) => s.split_whitespace().map(String::from).collect(),
                    Some(CommandDoc::Argv(v)) => v,
                    None => return Err(Error::syntax(&location, "oracle peripheral needs `command`")),
                };
                PeripheralGroup::Oracle(OracleGroup::new(
                    pd.name.clone(),
                    generators,
                    command,
                    pd.normal_form.unwrap_or(false),
                ))
            }
            other => {
                return Err(Error::syntax(&location, format!("unknown peripheral kind `{other}`")));
            }
        };
        peripherals.push(Peripheral {
            name: pd.name,
            group,
        });
    }
    if let Some(c) = &doc.constants {
        if c.c < 1 || c.delta < 1 {
            return Err(Error::InvalidConstants("C and delta must be at least 1".into()));
        }
        if c.c > c.c_prime {
            return Err(Error::InvalidConstants(format!(
                "C = {} exceeds C' = {}",
                c.c, c.c_prime
            )));
        }
    }
    let model = match doc.model {
        None => None,
        Some(Value::String(s)) => Some(ModelRef::Path(s)),
        Some(v @ Value::Object(_)) => Some(ModelRef::Inline(v)),
        Some(_) => return Err(Error::syntax("model", "expected a path or an object")),
    };
    let mut p = Presentation {
        name: doc.name,
        x: doc.x,
        peripherals,
        relators: Vec::new(),
        constants: doc.constants,
        model,
    };
    let relators = doc
        .relators
        .iter()
        .enumerate()
        .map(|(i, r)| p.parse_word_in(r, &format!("relator {i}")))
        .collect::<Result<Vec<_>>>()?;
    p.relators = relators;
    Ok(p)
}

impl Presentation {
    pub fn x_names(&self) -> &[String] {
        &self.x
    }

    pub fn peripherals(&self) -> &[Peripheral] {
        &self.peripherals
    }

    pub fn peripheral(&self, lambda: usize) -> &Peripheral {
        &self.peripherals[lambda]
    }

    pub fn peripheral_index(&self, name: &str) -> Option<usize> {
        self.peripherals.iter().position(|p| p.name == name)
    }

    /// `m = |Λ|`
    pub fn rank(&self) -> usize {
        self.peripherals.len()
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn constants(&self) -> Option<&CertifiedConstants> {
        self.constants.as_ref()
    }

    pub fn set_constants(&mut self, c: Option<CertifiedConstants>) {
        self.constants = c;
    }

    pub fn model(&self) -> Option<&ModelRef> {
        self.model.as_ref()
    }

    pub fn set_model(&mut self, m: Option<ModelRef>) {
        self.model = m;
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        self.parse_word_in(text, "word")
    }

    fn parse_word_in(&self, text: &str, context: &str) -> Result<Word> {
        let mut out = Vec::new();
        for tok in text.split_whitespace() {
            if let Some((per, rest)) = tok.split_once(':') {
                let lambda = self.peripheral_index(per).ok_or_else(|| Error::UnknownLetter {
                    context: context.to_string(),
                    token: tok.to_string(),
                })?;
                let e = self.peripherals[lambda].parse_element(rest, context)?;
                out.push(Letter::h(lambda, e));
            } else {
                let (name, inv) = match tok.strip_suffix("^-1") {
                    Some(n) => (n, true),
                    None => (tok, false),
                };
                let g = self.x.iter().position(|x| x == name).ok_or_else(|| Error::UnknownLetter {
                    context: context.to_string(),
                    token: tok.to_string(),
                })?;
                out.push(if inv { Letter::x_inv(g) } else { Letter::x(g) });
            }
        }
        Ok(Word::from_letters(out))
    }

    pub fn format_letter(&self, l: &Letter) -> String {
        match *l {
            Letter::X { generator, inverse } => {
                let n = &self.x[generator as usize];
                if inverse {
                    format!("{n}^-1")
                } else {
                    n.clone()
                }
            }
            Letter::H {
                peripheral,
                element,
            } => {
                let per = &self.peripherals[peripheral as usize];
                format!("{}:{}", per.name, per.element_name(element))
            }
        }
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.letters()
            .iter()
            .map(|l| self.format_letter(l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn format_relators(&self) -> Vec<String> {
        self.relators.iter().map(|r| self.format_word(r)).collect()
    }

    /// Every letter of `X ⊔ X⁻¹` and every nontrivial element of a table
    /// peripheral. Oracle peripherals contribute their generators and
    /// their inverses.
    pub fn alphabet(&self) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for g in 0..self.x.len() {
            out.push(Letter::x(g));
            out.push(Letter::x_inv(g));
        }
        for (lambda, per) in self.peripherals.iter().enumerate() {
            match &per.group {
                PeripheralGroup::Table(t) => {
                    for e in 0..t.order() as u32 {
                        if e != t.identity() {
                            out.push(Letter::h(lambda, e));
                        }
                    }
                }
                PeripheralGroup::Oracle(o) => {
                    let mut ids = BTreeSet::new();
                    for g in 0..o.generators().len() as u32 {
                        for inv in [false, true] {
                            let id = o.intern(vec![(g, inv)])?;
                            if id != 0 {
                                ids.insert(id);
                            }
                        }
                    }
                    out.extend(ids.into_iter().map(|e| Letter::h(lambda, e)));
                }
            }
        }
        Ok(out)
    }

    /// The presentation as a document; parsing the result gives an equal
    /// presentation.
    pub fn to_document(&self) -> Value {
        let peripherals = self
            .peripherals
            .iter()
            .map(|per| match &per.group {
                PeripheralGroup::Table(t) => PeripheralDoc {
                    name: per.name.clone(),
                    kind: "finite-table".into(),
                    elements: Some(t.names().to_vec()),
                    identity: Some(t.names()[t.identity() as usize].clone()),
                    table: Some(t.raw_table()),
                    generators: None,
                    command: None,
                    normal_form: None,
                },
                PeripheralGroup::Oracle(o) => PeripheralDoc {
                    name: per.name.clone(),
                    kind: "oracle".into(),
                    elements: None,
                    identity: None,
                    table: None,
                    generators: Some(o.generators().to_vec()),
                    command: Some(CommandDoc::Argv(o.command().to_vec())),
                    normal_form: Some(o.has_normal_form()),
                },
            })
            .collect();
        let doc = PresentationDoc {
            name: self.name.clone(),
            x: self.x.clone(),
            peripherals,
            relators: self.format_relators(),
            constants: self.constants.clone(),
            model: self.model.as_ref().map(|m| match m {
                ModelRef::Path(s) => Value::String(s.clone()),
                ModelRef::Inline(v) => v.clone(),
            }),
        };
        serde_json::to_value(doc).expect("presentation documents always serialize")
    }

    pub fn display<'a>(&'a self, w: &'a Word) -> words::DisplayWord<'a> {
        words::DisplayWord {
            word: w,
            presentation: self,
        }
    }
}

/// `Ω_λ` per peripheral, their union, and `M = max ||R||`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaReport {
    pub per_peripheral: Vec<BTreeSet<u32>>,
    pub m: usize,
}

impl OmegaReport {
    /// `|Ω|`, letters identified by element.
    pub fn size(&self) -> usize {
        self.per_peripheral.iter().map(BTreeSet::len).sum()
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.per_peripheral
            .iter()
            .enumerate()
            .flat_map(|(lambda, set)| set.iter().map(move |&e| Letter::h(lambda, e)))
            .collect()
    }

    /// `Λ₀`: peripherals with at least one letter in some relator.
    pub fn lambda0(&self) -> Vec<usize> {
        (0..self.per_peripheral.len())
            .filter(|&l| !self.per_peripheral[l].is_empty())
            .collect()
    }
}

pub fn extract_omega(p: &Presentation) -> OmegaReport {
    let mut per_peripheral = vec![BTreeSet::new(); p.rank()];
    for r in p.relators() {
        for l in r {
            if let Letter::H {
                peripheral,
                element,
            } = *l
            {
                per_peripheral[peripheral as usize].insert(element);
            }
        }
    }
    let m = p.relators().iter().map(Word::len).max().unwrap_or(0);
    OmegaReport { per_peripheral, m }
}

/// No relator, read cyclically, has two adjacent letters from one `H_λ`.
pub fn is_reduced_presentation(p: &Presentation) -> bool {
    p.relators().iter().all(|r| {
        let l = r.letters();
        let n = l.len();
        (0..n).all(|i| {
            let j = (i + 1) % n;
            // a single letter is adjacent to itself only when read twice
            i == j || !l[i].same_peripheral(&l[j])
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "advisory", rename_all = "kebab-case")]
pub enum Advisory {
    /// The peripheral has no letter in any relator and splits off as a free factor.
    OutsideLambda0 { peripheral: String },
    /// `M < 2`: the group is a free product of a free group and the
    /// peripherals, so it has no finite non-parabolic subgroups.
    FreeProductBranch { m: usize },
    /// `Λ₀ = ∅` with `X ≠ ∅`: the relevant factor is hyperbolic and finite
    /// subgroups have order at most `(2|X|)^{4δ+2}`.
    HyperbolicBranch { x: usize },
}

pub fn validate_generality(p: &Presentation) -> Vec<Advisory> {
    let omega = extract_omega(p);
    let mut out: Vec<Advisory> = p
        .peripherals()
        .iter()
        .enumerate()
        .filter(|(l, _)| omega.per_peripheral[*l].is_empty())
        .map(|(_, per)| Advisory::OutsideLambda0 {
            peripheral: per.name.clone(),
        })
        .collect();
    if omega.m < 2 {
        out.push(Advisory::FreeProductBranch { m: omega.m });
    } else if omega.lambda0().is_empty() && !p.x_names().is_empty() {
        out.push(Advisory::HyperbolicBranch { x: p.x_names().len() });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    #[test]
    fn dinf_has_two_peripherals_and_no_relators() {
        let p = bundled::dinf();
        assert_eq!(p.rank(), 2);
        assert_eq!(extract_omega(&p).m, 0);
        assert_eq!(extract_omega(&p).size(), 0);
    }

    #[test]
    fn s3_document_parses() {
        let p = bundled::s3();
        assert_eq!(p.rank(), 1);
        let om = extract_omega(&p);
        assert_eq!(om.m, 4);
        let r = p.peripheral(0).table().unwrap().index_of("r").unwrap();
        assert_eq!(om.per_peripheral[0], BTreeSet::from([r]));
    }

    #[test]
    fn table_missing_inverse_is_rejected() {
        // {1, a} where a*a = a: identity row/column fine, a has no inverse
        let err = TableGroup::new("H", vec!["1".into(), "a".into()], "1", vec![vec![0, 1], vec![1, 1]])
            .unwrap_err();
        assert!(matches!(err, Error::TableNotAGroup { .. }), "{err}");
        assert!(err.to_string().contains("no inverse"));
    }

    #[test]
    fn non_associative_table_is_rejected() {
        // identity 0; a 3-element loop that is not associative
        let t = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 0]];
        let err = TableGroup::new("H", vec!["1".into(), "a".into(), "b".into()], "1", t).unwrap_err();
        assert!(err.to_string().contains("associativity"), "{err}");
    }

    #[test]
    fn errors_on_bad_documents() {
        let bad = r#"{"name": "n", "x": ["t"], "peripherals": [], "relators": ["u"]}"#;
        assert!(matches!(parse_presentation(bad), Err(Error::UnknownLetter { .. })));
        let dup = r#"{"name": "n", "x": ["t", "t"]}"#;
        assert!(matches!(parse_presentation(dup), Err(Error::DuplicateName(_))));
        let clash = r#"{"name": "n", "x": ["H"], "peripherals": [
            {"name": "H", "kind": "finite-table", "elements": ["1"], "identity": "1", "table": [[0]]}]}"#;
        assert!(matches!(parse_presentation(clash), Err(Error::DuplicateName(_))));
        assert!(matches!(parse_presentation("{"), Err(Error::Syntax { .. })));
        let consts = r#"{"name": "n", "constants": {"C": 3, "Cprime": 2, "delta": 1}}"#;
        assert!(matches!(parse_presentation(consts), Err(Error::InvalidConstants(_))));
    }

    #[test]
    fn identity_is_not_a_letter() {
        let p = bundled::s3();
        assert!(matches!(p.parse_word("H1:1"), Err(Error::UnknownLetter { .. })));
        assert_eq!(p.format_word(&p.parse_word("H1:r^-1").unwrap()), "H1:r2");
    }

    fn with_relators(p: &Presentation, rels: &[&str]) -> Presentation {
        let mut doc = p.to_document();
        doc["relators"] = serde_json::json!(rels);
        doc.as_object_mut().unwrap().remove("constants");
        parse_presentation(&doc.to_string()).unwrap()
    }

    #[test]
    fn omega_examples() {
        let p = bundled::s3();
        let empty = with_relators(&p, &[]);
        let om = extract_omega(&empty);
        assert_eq!((om.size(), om.m), (0, 0));

        let two = r#"{"name": "z2z3x", "x": ["x"], "peripherals": [
            {"name": "H1", "kind": "finite-table", "elements": ["1", "a"], "identity": "1", "table": [[0,1],[1,0]]},
            {"name": "H2", "kind": "finite-table", "elements": ["1", "b", "b2"], "identity": "1",
             "table": [[0,1,2],[1,2,0],[2,0,1]]}],
            "relators": ["x H1:a x^-1 H1:a"]}"#;
        let q = parse_presentation(two).unwrap();
        let om = extract_omega(&q);
        assert_eq!(om.per_peripheral[0], BTreeSet::from([1]));
        assert!(om.per_peripheral[1].is_empty());
        assert_eq!(om.m, 4);
    }

    #[test]
    fn reduced_presentation_examples() {
        let p = bundled::s3();
        assert!(is_reduced_presentation(&with_relators(&p, &["t t"])));
        assert!(!is_reduced_presentation(&with_relators(&p, &["H1:r H1:r"])));
        assert!(!is_reduced_presentation(&with_relators(&p, &["H1:r t H1:r"])));
        assert!(is_reduced_presentation(&p));
    }

    #[test]
    fn generality_examples() {
        let d = validate_generality(&bundled::dinf());
        assert_eq!(
            d,
            vec![
                Advisory::OutsideLambda0 { peripheral: "H1".into() },
                Advisory::OutsideLambda0 { peripheral: "H2".into() },
                Advisory::FreeProductBranch { m: 0 },
            ]
        );
        assert!(validate_generality(&bundled::s3()).is_empty());
        let hyp = parse_presentation(r#"{"name": "z2", "x": ["x"], "relators": ["x x"]}"#).unwrap();
        assert_eq!(validate_generality(&hyp), vec![Advisory::HyperbolicBranch { x: 1 }]);
    }

    #[test]
    fn document_round_trip() {
        for p in bundled::all_presentations() {
            let again = parse_presentation(&p.to_document().to_string()).unwrap();
            assert_eq!(p, again);
        }
    }
}
