use std::io::{self, Write};

use super::Profile;

/// Writes `profile` in Callgrind format with no name or position compression.
///
/// Functions appear in `first_record_index` order, each preceded by explicit
/// `ob=` and `fl=` lines, and every call carries explicit `cob=`/`cfi=`/`cfn=`.
pub fn write_canonical<W: Write>(profile: &Profile, out: &mut W) -> io::Result<()> {
    writeln!(out, "# callgrind format")?;
    for (key, value) in &profile.header {
        for line in value.split('\n') {
            writeln!(out, "{key}: {line}")?;
        }
    }
    writeln!(out, "events: {}", profile.events.names.join(" "))?;
    for derived in &profile.events.derived {
        writeln!(out, "event: {} = {}", derived.name, derived.formula)?;
    }
    if let Some(summary) = &profile.summary {
        writeln!(out, "summary: {summary}")?;
    }

    let columns = profile
        .header
        .get("positions")
        .map_or(1, |p| p.split_whitespace().count().max(1));
    let position = vec!["0"; columns].join(" ");

    for (key, record) in profile.functions_in_record_order() {
        writeln!(out)?;
        writeln!(out, "ob={}", key.object)?;
        writeln!(out, "fl={}", key.file)?;
        writeln!(out, "fn={}", protect_name(&key.name))?;
        if !record.self_cost.is_zero() {
            writeln!(out, "{position} {}", record.self_cost)?;
        }
        for call in &record.calls {
            writeln!(out, "cob={}", call.callee.object)?;
            writeln!(out, "cfi={}", call.callee.file)?;
            writeln!(out, "cfn={}", protect_name(&call.callee.name))?;
            writeln!(out, "calls={} {position}", call.count)?;
            writeln!(out, "{position} {}", call.inclusive_cost)?;
        }
    }
    Ok(())
}

pub fn write_canonical_string(profile: &Profile) -> String {
    let mut buf = Vec::new();
    write_canonical(profile, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("profile strings are UTF-8")
}

/// A bare name that happens to look like `(123)...` would be read back as a
/// compression reference; wrap it in a throwaway definition instead.
fn protect_name(name: &str) -> std::borrow::Cow<'_, str> {
    let looks_compressed = name
        .strip_prefix('(')
        .and_then(|rest| rest.split_once(')'))
        .is_some_and(|(digits, _)| {
            !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
        });
    if looks_compressed {
        format!("(0) {name}").into()
    } else {
        name.into()
    }
}
