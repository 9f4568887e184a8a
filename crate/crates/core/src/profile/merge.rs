use std::collections::HashMap;

use indexmap::IndexMap;

use super::{CallRecord, FunctionKey, FunctionRecord, Profile, ProfileError};

/// Sums several parts of one profiling run into a single profile.
///
/// Call records are paired per caller by `(callee, k)`: the k-th record to a
/// given callee in one part adds onto the k-th record to that callee in the
/// others. Record indices are renumbered in order of first appearance,
/// earliest part first. A single part is returned unchanged.
pub fn merge_parts(parts: &[Profile]) -> Result<Profile, ProfileError> {
    let Some(first) = parts.first() else {
        return Err(ProfileError::EmptyProfile);
    };
    for part in &parts[1..] {
        if part.events.names != first.events.names {
            return Err(ProfileError::EventMismatch {
                left: first.events.names.clone(),
                right: part.events.names.clone(),
            });
        }
    }
    if parts.len() == 1 {
        return Ok(first.clone());
    }

    let n = first.events.len();
    let mut functions: IndexMap<FunctionKey, FunctionRecord> = IndexMap::new();
    // (caller, callee, k) -> position in the caller's merged call list
    let mut call_slots: HashMap<(FunctionKey, FunctionKey, usize), usize> = HashMap::new();

    for part in parts {
        for (key, record) in part.functions_in_record_order() {
            let next = functions.len();
            let merged = functions
                .entry(key.clone())
                .or_insert_with(|| FunctionRecord {
                    self_cost: first.events.zero(),
                    calls: Vec::new(),
                    first_record_index: next,
                });
            merged.self_cost.add(&record.self_cost);
            let mut seen: HashMap<&FunctionKey, usize> = HashMap::new();
            for call in &record.calls {
                let k = seen.entry(&call.callee).or_insert(0);
                let slot_key = (key.clone(), call.callee.clone(), *k);
                *k += 1;
                match call_slots.get(&slot_key) {
                    Some(&slot) => {
                        let target = &mut merged.calls[slot];
                        target.count = target.count.saturating_add(call.count);
                        target.inclusive_cost.add(&call.inclusive_cost);
                    }
                    None => {
                        call_slots.insert(slot_key, merged.calls.len());
                        merged.calls.push(CallRecord {
                            callee: call.callee.clone(),
                            count: call.count,
                            inclusive_cost: call.inclusive_cost.clone().normalized(n),
                        });
                    }
                }
            }
        }
    }

    let summary = if parts.iter().any(|p| p.summary.is_some()) {
        let mut total = first.events.zero();
        for p in parts {
            total.add(&p.total());
        }
        Some(total)
    } else {
        None
    };

    let mut header = first.header.clone();
    header.remove("part");
    let merged = Profile {
        header,
        events: first.events.clone(),
        functions,
        summary,
    };
    merged.check_conservation()?;
    Ok(merged)
}
