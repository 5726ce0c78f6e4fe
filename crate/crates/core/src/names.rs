//! Symbol naming shared by grounding, emission, and plan files.

/// Ground symbol name: `pred` for nullary symbols, `pred(a,b)` otherwise.
pub fn ground_name(head: &str, args: &[&str]) -> String {
    if args.is_empty() {
        head.to_string()
    } else {
        format!("{}({})", head, args.join(","))
    }
}

/// Maps a ground name onto a PDDL-safe identifier: `at(l1,l2)` becomes
/// `at_l1_l2`. Characters outside `[A-Za-z0-9_-]` turn into `_`.
pub fn sanitize(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for ch in name.chars() {
        match ch {
            ')' => {}
            c if c.is_ascii_alphanumeric() || c == '_' || c == '-' => out.push(c),
            _ => out.push('_'),
        }
    }
    out
}

/// Normalizes one plan-file step. Accepts `(pick l1)`, `pick(l1)`,
/// `pick l1`, and already-sanitized names.
pub fn plan_step_to_name(step: &str) -> String {
    let s = step.trim();
    let s = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .unwrap_or(s);
    if s.contains('(') {
        return s.replace(' ', "");
    }
    let parts: Vec<&str> = s.split_whitespace().collect();
    match parts.split_first() {
        Some((head, args)) => ground_name(head, args),
        None => String::new(),
    }
}
