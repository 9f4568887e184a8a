use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use indexmap::IndexMap;

use super::{CallRecord, FunctionKey, FunctionRecord, Profile, ProfileError, SyntaxErrorKind};
use crate::cost::{CostVector, DerivedEvent, EventSpec};

/// Parses a profile. Multi-part inputs are merged into one profile.
pub fn parse_profile<R: BufRead>(input: R) -> Result<Profile, ProfileError> {
    let mut parts = parse_parts(input)?;
    if parts.len() == 1 {
        Ok(parts.pop().expect("one part"))
    } else {
        super::merge_parts(&parts)
    }
}

pub fn parse_str(text: &str) -> Result<Profile, ProfileError> {
    parse_profile(text.as_bytes())
}

/// Parses a profile, keeping each `part:` section separate.
///
/// A `part:` line opens a new part once the current one already has a
/// `part:` line or any function data. Compression tables carry over between
/// parts; so do the event list and position layout unless redeclared.
pub fn parse_parts<R: BufRead>(input: R) -> Result<Vec<Profile>, ProfileError> {
    let mut parser = Parser::default();
    for (i, raw) in input.split(b'\n').enumerate() {
        let raw = raw?;
        let text = String::from_utf8_lossy(&raw);
        parser.line_no = i + 1;
        parser.line(&text)?;
    }
    parser.finish()
}

#[derive(Clone, Copy)]
enum Namespace {
    Object,
    File,
    Function,
}

#[derive(Default)]
struct NameTables {
    objects: HashMap<u64, String>,
    files: HashMap<u64, String>,
    functions: HashMap<u64, String>,
}

impl NameTables {
    fn table(&mut self, ns: Namespace) -> &mut HashMap<u64, String> {
        match ns {
            Namespace::Object => &mut self.objects,
            Namespace::File => &mut self.files,
            Namespace::Function => &mut self.functions,
        }
    }
}

struct PartBuilder {
    header: BTreeMap<String, String>,
    events: Option<EventSpec>,
    derived: Vec<DerivedEvent>,
    position_columns: usize,
    functions: IndexMap<FunctionKey, FunctionRecord>,
    summary: Option<CostVector>,
    seen_part: bool,
    has_body: bool,
}

impl Default for PartBuilder {
    fn default() -> Self {
        PartBuilder {
            header: BTreeMap::new(),
            events: None,
            derived: Vec::new(),
            position_columns: 1,
            functions: IndexMap::new(),
            summary: None,
            seen_part: false,
            has_body: false,
        }
    }
}

struct PendingCall {
    callee: FunctionKey,
    count: u64,
    line: usize,
}

#[derive(Default)]
struct Parser {
    line_no: usize,
    names: NameTables,
    part: PartBuilder,
    done: Vec<Profile>,
    object: String,
    file: String,
    source_file: String,
    function: Option<FunctionKey>,
    callee_object: Option<String>,
    callee_file: Option<String>,
    callee_name: Option<String>,
    pending: Option<PendingCall>,
    last_positions: Vec<i64>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Parser {
    fn syntax(&self, kind: SyntaxErrorKind, token: &str) -> ProfileError {
        ProfileError::Syntax {
            line: self.line_no,
            token: token.to_string(),
            kind,
        }
    }

    fn line(&mut self, raw: &str) -> Result<(), ProfileError> {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(());
        }
        let first = line.as_bytes()[0];
        if first.is_ascii_digit() || matches!(first, b'+' | b'-' | b'*') {
            return self.cost_line(line);
        }
        if self.pending.is_some() {
            let token = line.split_whitespace().next().unwrap_or(line);
            return Err(self.syntax(SyntaxErrorKind::CallsWithoutCostLine, token));
        }
        if let Some((key, value)) = line.split_once('=') {
            if is_ident(key) {
                return self.directive(key, value.trim());
            }
        }
        if let Some((key, value)) = line.split_once(':') {
            if is_ident(key) {
                return self.header(key, value.trim());
            }
        }
        let token = line.split_whitespace().next().unwrap_or(line);
        Err(self.syntax(SyntaxErrorKind::UnknownDirective, token))
    }

    /// Resolves `(id) name`, `(id)` or a bare name against one namespace.
    fn resolve(&mut self, ns: Namespace, value: &str) -> Result<String, ProfileError> {
        if let Some(rest) = value.strip_prefix('(') {
            if let Some(close) = rest.find(')') {
                let digits = &rest[..close];
                if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                    let id: u64 = digits
                        .parse()
                        .map_err(|_| self.syntax(SyntaxErrorKind::NonNumericCost, value))?;
                    let name = rest[close + 1..].trim();
                    if name.is_empty() {
                        return match self.names.table(ns).get(&id) {
                            Some(s) => Ok(s.clone()),
                            None => Err(self.syntax(
                                SyntaxErrorKind::UndefinedCompressionId,
                                &format!("({id})"),
                            )),
                        };
                    }
                    self.names.table(ns).insert(id, name.to_string());
                    return Ok(name.to_string());
                }
            }
        }
        Ok(value.to_string())
    }

    fn directive(&mut self, key: &str, value: &str) -> Result<(), ProfileError> {
        match key {
            "ob" => self.object = self.resolve(Namespace::Object, value)?,
            "fl" => {
                self.file = self.resolve(Namespace::File, value)?;
                self.source_file = self.file.clone();
            }
            "fi" | "fe" => self.source_file = self.resolve(Namespace::File, value)?,
            "fn" => {
                let name = self.resolve(Namespace::Function, value)?;
                if name.is_empty() {
                    return Err(self.syntax(SyntaxErrorKind::EmptyName, "fn="));
                }
                self.source_file = self.file.clone();
                let key = FunctionKey::new(self.object.clone(), self.file.clone(), name);
                let next = self.part.functions.len();
                self.part
                    .functions
                    .entry(key.clone())
                    .or_insert_with(|| FunctionRecord {
                        self_cost: CostVector::default(),
                        calls: Vec::new(),
                        first_record_index: next,
                    });
                self.function = Some(key);
                self.part.has_body = true;
            }
            "cob" => self.callee_object = Some(self.resolve(Namespace::Object, value)?),
            "cfi" | "cfl" => self.callee_file = Some(self.resolve(Namespace::File, value)?),
            "cfn" => {
                let name = self.resolve(Namespace::Function, value)?;
                if name.is_empty() {
                    return Err(self.syntax(SyntaxErrorKind::EmptyName, "cfn="));
                }
                self.callee_name = Some(name);
            }
            "calls" => self.calls(value)?,
            "jump" | "jcnd" => {}
            _ => return Err(self.syntax(SyntaxErrorKind::UnknownDirective, &format!("{key}="))),
        }
        Ok(())
    }

    fn calls(&mut self, value: &str) -> Result<(), ProfileError> {
        if self.function.is_none() {
            return Err(self.syntax(SyntaxErrorKind::CostBeforeFunction, "calls="));
        }
        let count_token = value.split_whitespace().next().unwrap_or("");
        let count: u64 = match count_token.parse() {
            Ok(n) if n >= 1 => n,
            _ => return Err(self.syntax(SyntaxErrorKind::InvalidCallCount, count_token)),
        };
        let Some(name) = self.callee_name.take() else {
            return Err(self.syntax(SyntaxErrorKind::CallsWithoutCallee, "calls="));
        };
        let object = self
            .callee_object
            .take()
            .unwrap_or_else(|| self.object.clone());
        let file = self
            .callee_file
            .take()
            .unwrap_or_else(|| self.source_file.clone());
        self.pending = Some(PendingCall {
            callee: FunctionKey::new(object, file, name),
            count,
            line: self.line_no,
        });
        Ok(())
    }

    fn parse_position(&self, token: &str, column: usize) -> Result<i64, ProfileError> {
        let last = self.last_positions.get(column).copied().unwrap_or(0);
        let bad = || self.syntax(SyntaxErrorKind::NonNumericCost, token);
        let parse_abs = |s: &str| -> Option<i64> {
            if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                i64::from_str_radix(hex, 16).ok()
            } else {
                s.parse().ok()
            }
        };
        if token == "*" {
            return Ok(last);
        }
        if let Some(rest) = token.strip_prefix('+') {
            return parse_abs(rest)
                .map(|d| last.wrapping_add(d))
                .ok_or_else(bad);
        }
        if let Some(rest) = token.strip_prefix('-') {
            return parse_abs(rest)
                .map(|d| last.wrapping_sub(d))
                .ok_or_else(bad);
        }
        parse_abs(token).ok_or_else(bad)
    }

    fn cost_line(&mut self, line: &str) -> Result<(), ProfileError> {
        let Some(function) = self.function.clone() else {
            let token = line.split_whitespace().next().unwrap_or(line);
            return Err(self.syntax(SyntaxErrorKind::CostBeforeFunction, token));
        };
        let mut tokens = line.split_whitespace();
        let columns = self.part.position_columns;
        let mut positions = Vec::with_capacity(columns);
        for column in 0..columns {
            let token = tokens
                .next()
                .ok_or_else(|| self.syntax(SyntaxErrorKind::NonNumericCost, line))?;
            positions.push(self.parse_position(token, column)?);
        }
        self.last_positions = positions;

        let event_count = self.part.events.as_ref().map_or(0, EventSpec::len);
        let mut values = Vec::new();
        for token in tokens {
            let v: u64 = token
                .parse()
                .map_err(|_| self.syntax(SyntaxErrorKind::NonNumericCost, token))?;
            values.push(v);
        }
        if values.len() > event_count {
            let token = line.split_whitespace().last().unwrap_or(line);
            return Err(self.syntax(SyntaxErrorKind::TooManyCosts, token));
        }
        let cost = CostVector::from_values(values).normalized(event_count);

        let line_no = self.line_no;
        let record = self
            .part
            .functions
            .get_mut(&function)
            .expect("current function is always registered");
        match self.pending.take() {
            Some(call) => record.calls.push(CallRecord {
                callee: call.callee,
                count: call.count,
                inclusive_cost: cost,
            }),
            None => {
                let mut self_cost = std::mem::take(&mut record.self_cost).normalized(event_count);
                if self_cost.checked_add(&cost).is_err() {
                    return Err(ProfileError::Syntax {
                        line: line_no,
                        token: line.to_string(),
                        kind: SyntaxErrorKind::CostOverflow,
                    });
                }
                record.self_cost = self_cost;
            }
        }
        Ok(())
    }

    fn header(&mut self, key: &str, value: &str) -> Result<(), ProfileError> {
        match key {
            "events" => {
                if self.part.has_body {
                    return Err(self.syntax(SyntaxErrorKind::EventsAfterData, "events:"));
                }
                let names: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                for (i, n) in names.iter().enumerate() {
                    if names[..i].contains(n) {
                        return Err(self.syntax(SyntaxErrorKind::DuplicateEvent, n));
                    }
                }
                self.part.events = Some(EventSpec {
                    names,
                    derived: Vec::new(),
                });
            }
            "event" => match value.split_once('=') {
                Some((name, formula)) => self.part.derived.push(DerivedEvent {
                    name: name.trim().to_string(),
                    formula: formula.trim().to_string(),
                }),
                None => append_header(&mut self.part.header, key, value),
            },
            "summary" | "totals" => {
                let mut values = Vec::new();
                for token in value.split_whitespace() {
                    let v: u64 = token
                        .parse()
                        .map_err(|_| self.syntax(SyntaxErrorKind::NonNumericCost, token))?;
                    values.push(v);
                }
                self.part.summary = Some(CostVector::from_values(values));
            }
            "positions" => {
                let tokens: Vec<&str> = value.split_whitespace().collect();
                if tokens.is_empty() || tokens.iter().any(|t| *t != "instr" && *t != "line") {
                    return Err(self.syntax(SyntaxErrorKind::InvalidPositions, value));
                }
                self.part.position_columns = tokens.len();
                self.last_positions.clear();
                self.part.header.insert(key.to_string(), value.to_string());
            }
            "part" => {
                if self.part.seen_part || self.part.has_body {
                    self.start_new_part()?;
                }
                self.part.seen_part = true;
                self.part.header.insert(key.to_string(), value.to_string());
            }
            _ => append_header(&mut self.part.header, key, value),
        }
        Ok(())
    }

    fn start_new_part(&mut self) -> Result<(), ProfileError> {
        let events = self.part.events.clone();
        let columns = self.part.position_columns;
        let positions = self.part.header.get("positions").cloned();
        let finished = std::mem::take(&mut self.part);
        self.done.push(finish_part(finished)?);
        self.part.events = events;
        self.part.position_columns = columns;
        if let Some(p) = positions {
            self.part.header.insert("positions".into(), p);
        }
        self.function = None;
        self.last_positions.clear();
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<Profile>, ProfileError> {
        if let Some(call) = &self.pending {
            return Err(ProfileError::Syntax {
                line: call.line,
                token: "calls=".into(),
                kind: SyntaxErrorKind::CallsWithoutCostLine,
            });
        }
        let last = std::mem::take(&mut self.part);
        self.done.push(finish_part(last)?);
        Ok(self.done)
    }
}

fn append_header(header: &mut BTreeMap<String, String>, key: &str, value: &str) {
    header
        .entry(key.to_string())
        .and_modify(|v| {
            v.push('\n');
            v.push_str(value);
        })
        .or_insert_with(|| value.to_string());
}

fn finish_part(part: PartBuilder) -> Result<Profile, ProfileError> {
    let mut events = match part.events {
        Some(e) if !e.is_empty() => e,
        _ => return Err(ProfileError::EmptyProfile),
    };
    events.derived = part.derived;
    let n = events.len();
    let mut functions = part.functions;
    for record in functions.values_mut() {
        record.self_cost = std::mem::take(&mut record.self_cost).normalized(n);
        for call in &mut record.calls {
            call.inclusive_cost = std::mem::take(&mut call.inclusive_cost).normalized(n);
        }
    }
    let profile = Profile {
        header: part.header,
        events,
        functions,
        summary: part.summary.map(|s| s.normalized(n)),
    };
    profile.check_conservation()?;
    Ok(profile)
}
