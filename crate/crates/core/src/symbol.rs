//! Structural decomposition of demangled C++ symbol names.
//!
//! Splitting happens on `::` only outside every kind of bracket. Operator
//! names such as `operator<<` or `operator()` are treated as opaque so their
//! punctuation does not disturb bracket depth.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolParts {
    pub raw: String,
    /// Namespaces and classes, outermost first, template arguments removed.
    pub scope_path: Vec<String>,
    pub leaf: String,
    pub had_template_args: bool,
    pub had_signature: bool,
}

impl SymbolParts {
    /// `scope::leaf` with all stripped pieces left out.
    pub fn reconstruct(&self) -> String {
        let mut s = self.scope_path.join("::");
        if !s.is_empty() {
            s.push_str("::");
        }
        s.push_str(&self.leaf);
        s
    }

    pub fn scope(&self) -> String {
        self.scope_path.join("::")
    }
}

const OPERATOR_PUNCT: &[&str] = &[
    "<=>", "<<=", ">>=", "->*", "()", "[]", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++",
    "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "<", ">", "+", "-", "*", "/", "%",
    "^", "&", "|", "~", "!", "=", ",",
];

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Marks characters that belong to `operator...` names.
fn operator_mask(chars: &[char]) -> Vec<bool> {
    let mut mask = vec![false; chars.len()];
    let word: Vec<char> = "operator".chars().collect();
    let mut i = 0;
    while i + word.len() <= chars.len() {
        let starts = chars[i..i + word.len()] == word[..]
            && (i == 0 || !is_ident_char(chars[i - 1]))
            && chars.get(i + word.len()).is_none_or(|c| !is_ident_char(*c));
        if !starts {
            i += 1;
            continue;
        }
        let mut j = i + word.len();
        while chars.get(j) == Some(&' ') {
            j += 1;
        }
        let rest: String = chars[j..].iter().collect();
        let mut end = j;
        if let Some(p) = OPERATOR_PUNCT.iter().find(|p| rest.starts_with(**p)) {
            end = j + p.chars().count();
        } else if rest.starts_with("\"\"") {
            end = j + 2;
            while chars.get(end).is_some_and(|c| is_ident_char(*c)) {
                end += 1;
            }
        } else if chars.get(j).is_some_and(|c| is_ident_char(*c)) {
            while chars.get(end).is_some_and(|c| is_ident_char(*c)) {
                end += 1;
            }
            let ident: String = chars[j..end].iter().collect();
            if (ident == "new" || ident == "delete") && rest[ident.len()..].starts_with("[]") {
                end += 2;
            }
        }
        if end == j {
            // bare word `operator`; leave it as an identifier
            end = i + word.len();
        }
        for m in &mut mask[i..end] {
            *m = true;
        }
        i = end;
    }
    mask
}

fn opener(c: char) -> Option<char> {
    match c {
        '>' => Some('<'),
        ')' => Some('('),
        ']' => Some('['),
        '}' => Some('{'),
        _ => None,
    }
}

struct Scan {
    chars: Vec<char>,
    opaque: Vec<bool>,
    /// Bracket depth before each character.
    depth: Vec<usize>,
    /// For each closing bracket, the index of its opener.
    partner: Vec<Option<usize>>,
    /// For each opening bracket, the index of its closer.
    closer: Vec<Option<usize>>,
    /// First position where the bracket structure breaks.
    imbalance: Option<usize>,
}

fn scan(raw: &str) -> Scan {
    let chars: Vec<char> = raw.chars().collect();
    let opaque = operator_mask(&chars);
    let mut depth = vec![0; chars.len()];
    let mut partner = vec![None; chars.len()];
    let mut closer = vec![None; chars.len()];
    let mut stack: Vec<(usize, char)> = Vec::new();
    let mut imbalance = None;
    for (i, &c) in chars.iter().enumerate() {
        depth[i] = stack.len();
        if opaque[i] || imbalance.is_some() {
            continue;
        }
        match c {
            '<' | '(' | '[' | '{' => stack.push((i, c)),
            _ => {
                if let Some(open) = opener(c) {
                    match stack.last() {
                        Some(&(pos, o)) if o == open => {
                            stack.pop();
                            partner[i] = Some(pos);
                            closer[pos] = Some(i);
                        }
                        _ => imbalance = Some(i),
                    }
                }
            }
        }
    }
    if imbalance.is_none() {
        imbalance = stack.first().map(|&(pos, _)| pos);
    }
    Scan {
        chars,
        opaque,
        depth,
        partner,
        closer,
        imbalance,
    }
}

impl Scan {
    fn is_scope_sep(&self, i: usize) -> bool {
        self.chars[i] == ':'
            && self.chars.get(i + 1) == Some(&':')
            && self.depth[i] == 0
            && !self.opaque[i]
    }

    /// Depth-0 `::`-separated ranges within `[start, end)`.
    fn segments(&self, start: usize, end: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut seg_start = start;
        let mut i = start;
        while i + 1 < end {
            if self.is_scope_sep(i) {
                out.push((seg_start, i));
                i += 2;
                seg_start = i;
            } else {
                i += 1;
            }
        }
        out.push((seg_start, end));
        out
    }

    fn text(&self, start: usize, end: usize) -> String {
        self.chars[start..end].iter().collect()
    }

    /// Removes depth-0 `<...>` runs inside one segment.
    fn strip_templates(&self, start: usize, end: usize) -> (String, bool) {
        let mut out = String::new();
        let mut stripped = false;
        let mut skip_to: Option<usize> = None;
        for i in start..end {
            if let Some(close) = skip_to {
                if i == close {
                    skip_to = None;
                }
                continue;
            }
            if self.depth[i] == 0 && self.chars[i] == '<' && !self.opaque[i] {
                if let Some(close) = self.closer[i] {
                    skip_to = Some(close);
                    stripped = true;
                    continue;
                }
            }
            out.push(self.chars[i]);
        }
        (out.trim().to_string(), stripped)
    }

    /// Drops a return type: everything up to the last depth-0 space.
    fn drop_return_type(&self, start: usize, end: usize) -> usize {
        let mut cut = start;
        for i in start..end {
            if self.chars[i] == ' ' && self.depth[i] == 0 && !self.opaque[i] && i + 1 < end {
                cut = i + 1;
            }
        }
        cut
    }

    /// Start of a trailing `(...)` parameter list, if there is one.
    fn signature_start(&self, end: usize) -> Option<usize> {
        const QUALIFIERS: &[&str] = &[" const", " volatile", " noexcept", " &&", " &", "&&", "&"];
        let mut stop = end;
        loop {
            while stop > 0 && self.chars[stop - 1] == ' ' {
                stop -= 1;
            }
            let tail: String = self.chars[..stop].iter().collect();
            let q = QUALIFIERS
                .iter()
                .find(|q| tail.ends_with(**q) && !self.opaque[stop - q.chars().count()]);
            match q {
                Some(q) => stop -= q.chars().count(),
                None => break,
            }
        }
        if stop == 0 || self.chars[stop - 1] != ')' || self.opaque[stop - 1] {
            return None;
        }
        let open = self.partner[stop - 1]?;
        if self.depth[open] != 0 || self.chars[..open].iter().all(|c| c.is_whitespace()) {
            return None;
        }
        Some(open)
    }
}

/// Splits a symbol into scope path and leaf.
pub fn parse_symbol(raw: &str) -> SymbolParts {
    let s = scan(raw);
    let n = s.chars.len();
    let opaque_leaf = |scope_path: Vec<String>, leaf: String| SymbolParts {
        raw: raw.to_string(),
        scope_path,
        leaf,
        had_template_args: false,
        had_signature: false,
    };

    if let Some(bad) = s.imbalance {
        let segs = s.segments(0, bad);
        let (last_start, _) = *segs.last().expect("at least one segment");
        let scope: Vec<String> = segs[..segs.len() - 1]
            .iter()
            .map(|&(a, b)| s.strip_templates(a, b).0)
            .filter(|x| !x.is_empty())
            .collect();
        let leaf = s.text(last_start, n).trim().to_string();
        if leaf.is_empty() {
            return opaque_leaf(Vec::new(), raw.trim().to_string());
        }
        return opaque_leaf(scope, leaf);
    }

    let sig = s.signature_start(n);
    let body_end = sig.unwrap_or(n);
    let segs = s.segments(0, body_end);
    let mut had_template_args = false;
    let mut parts: Vec<String> = Vec::with_capacity(segs.len());
    for (i, &(a, b)) in segs.iter().enumerate() {
        let a = if i == 0 { s.drop_return_type(a, b) } else { a };
        let (text, stripped) = s.strip_templates(a, b);
        had_template_args |= stripped;
        parts.push(text);
    }
    let leaf = parts.pop().unwrap_or_default();
    let scope_path: Vec<String> = parts.into_iter().filter(|p| !p.is_empty()).collect();
    if leaf.is_empty() {
        return opaque_leaf(Vec::new(), raw.trim().to_string());
    }
    SymbolParts {
        raw: raw.to_string(),
        scope_path,
        leaf,
        had_template_args,
        had_signature: sig.is_some(),
    }
}

/// Lowercased word tokens of an identifier or label.
///
/// Boundaries are non-alphanumeric characters, lower-to-upper case changes,
/// letter-to-digit changes after a lowercase letter, and the start of a
/// capitalized word after an acronym or digits. So `Physics2DServer` gives
/// `physics 2d server` and `X11Window` gives `x11 window`.
pub fn name_tokens(label: &str) -> Vec<String> {
    let chars: Vec<char> = label.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if let Some(&prev) = current.chars().last().as_ref() {
            let next = chars.get(i + 1).copied();
            let split = (prev.is_lowercase() && (c.is_uppercase() || c.is_ascii_digit()))
                || (c.is_uppercase()
                    && (prev.is_uppercase() || prev.is_ascii_digit())
                    && next.is_some_and(char::is_lowercase));
            if split {
                tokens.push(std::mem::take(&mut current));
            }
        }
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens.into_iter().map(|t| t.to_lowercase()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parts(raw: &str) -> (Vec<String>, String) {
        let p = parse_symbol(raw);
        (p.scope_path, p.leaf)
    }

    #[test]
    fn class_method() {
        assert_eq!(
            parts("ProceduralSky::_generate_sky"),
            (vec!["ProceduralSky".into()], "_generate_sky".into())
        );
    }

    #[test]
    fn free_function() {
        assert_eq!(parts("main"), (vec![], "main".into()));
    }

    #[test]
    fn templated_container_method_with_signature() {
        let p = parse_symbol("std::vector<std::pair<int,int>>::push_back(value_type&&)");
        assert_eq!(p.scope_path, vec!["std", "vector"]);
        assert_eq!(p.leaf, "push_back");
        assert!(p.had_template_args);
        assert!(p.had_signature);
    }

    #[test]
    fn call_operator_is_a_leaf_not_a_signature() {
        let p = parse_symbol("Foo::operator()");
        assert_eq!(p.leaf, "operator()");
        assert!(!p.had_signature);
        let p = parse_symbol("Foo::operator()(int) const");
        assert_eq!(p.leaf, "operator()");
        assert!(p.had_signature);
    }

    #[test]
    fn shift_operators_do_not_count_as_brackets() {
        let p = parse_symbol("std::operator<<(std::ostream&, char const*)");
        assert_eq!(p.scope_path, vec!["std"]);
        assert_eq!(p.leaf, "operator<<");
        let p = parse_symbol("Vec::operator<");
        assert_eq!(p.leaf, "operator<");
        assert!(!p.had_template_args);
        assert_eq!(
            parse_symbol("operator new[](unsigned long)").leaf,
            "operator new[]"
        );
    }

    #[test]
    fn return_type_and_qualifiers_are_dropped() {
        let p = parse_symbol("void ClassDB::register_class<Node>()");
        assert_eq!(p.scope_path, vec!["ClassDB"]);
        assert_eq!(p.leaf, "register_class");
        assert!(p.had_template_args && p.had_signature);
        assert_eq!(
            parts("Object::get(StringName const&) const"),
            (vec!["Object".into()], "get".into())
        );
    }

    #[test]
    fn anonymous_namespace_and_below_main() {
        assert_eq!(
            parts("(anonymous namespace)::run(int)"),
            (vec!["(anonymous namespace)".into()], "run".into())
        );
        assert_eq!(parts("(below main)"), (vec![], "(below main)".into()));
    }

    #[test]
    fn unbalanced_input_becomes_opaque_leaf() {
        let p = parse_symbol("Foo::bar<int::x");
        assert_eq!(p.scope_path, vec!["Foo"]);
        assert_eq!(p.leaf, "bar<int::x");
        assert!(!p.had_template_args);
        let p = parse_symbol("a>b::c");
        assert_eq!(p.scope_path, Vec::<String>::new());
        assert_eq!(p.leaf, "a>b::c");
    }

    #[test]
    fn degenerate_inputs_keep_a_leaf() {
        assert_eq!(parts("::foo"), (vec![], "foo".into()));
        assert_eq!(parts("Foo::"), (vec![], "Foo::".into()));
    }

    #[test]
    fn tokens_follow_case_and_digit_boundaries() {
        assert_eq!(name_tokens("Physics2DServer"), ["physics", "2d", "server"]);
        assert_eq!(name_tokens("PhysicsServer"), ["physics", "server"]);
        assert_eq!(name_tokens("X11Window"), ["x11", "window"]);
        assert_eq!(name_tokens("Window"), ["window"]);
        assert_eq!(name_tokens("OS_X11"), ["os", "x11"]);
        assert_eq!(name_tokens("Urho3D::Graphics"), ["urho", "3d", "graphics"]);
        assert_eq!(name_tokens("RasterizerGLES3"), ["rasterizer", "gles3"]);
        assert_eq!(name_tokens("MyHTTPServer"), ["my", "http", "server"]);
        assert_eq!(name_tokens("get_singleton"), ["get", "singleton"]);
    }
}
