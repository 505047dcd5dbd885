//! Condenses a run's history into the text log the advisor reads: one
//! line per evaluation and one line per adopted step-size change, newest
//! last. When the text exceeds the character budget, whole oldest lines
//! are dropped (a line is never split) and a marker line is prepended.

use crate::record::{EvaluationRecord, SigmaChange};

fn render_lines(history: &[EvaluationRecord], sigma_changes: &[SigmaChange]) -> Vec<String> {
    let mut lines = Vec::with_capacity(history.len() + sigma_changes.len());
    let mut changes = sigma_changes.iter().peekable();
    for rec in history {
        lines.push(format!("f(x{}) = {}", rec.generation, rec.offspring_f));
        while let Some(change) = changes.peek() {
            if change.generation <= rec.generation {
                lines.push(format!("step size changed: {} -> {}", change.old, change.new));
                changes.next();
            } else {
                break;
            }
        }
    }
    for change in changes {
        lines.push(format!("step size changed: {} -> {}", change.old, change.new));
    }
    lines
}

/// Emits the advisor log for `history` (ordered by generation), keeping
/// the rendered text within `char_budget` characters by dropping oldest
/// lines first.
pub fn condense_log(
    history: &[EvaluationRecord],
    sigma_changes: &[SigmaChange],
    char_budget: usize,
) -> String {
    let lines = render_lines(history, sigma_changes);
    if lines.is_empty() {
        return String::new();
    }
    let full_len: usize = lines.iter().map(|l| l.len() + 1).sum::<usize>() - 1;
    if full_len <= char_budget {
        return lines.join("\n");
    }
    let total = lines.len();
    for dropped in 1..=total {
        let kept = total - dropped;
        let marker = truncation_marker(kept, total);
        let body_len: usize = lines[dropped..].iter().map(|l| l.len() + 1).sum();
        if marker.len() + body_len <= char_budget {
            let mut out = marker;
            for line in &lines[dropped..] {
                out.push('\n');
                out.push_str(line);
            }
            return out;
        }
    }
    truncation_marker(0, total)
}

fn truncation_marker(kept: usize, total: usize) -> String {
    format!("[log truncated: showing last {kept} of {total} entries]")
}
