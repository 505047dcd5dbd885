//! Prompt rendering.
//!
//! The template is fixed; rendering only fills the `<LOG CONTENT>` and
//! `<STEP SIZE>` slots. Anything else would change what the model is
//! being asked, so the text here is deliberately frozen and covered by a
//! golden-file test.

/// The system message sent with every query.
pub const SYSTEM_MESSAGE: &str =
    "You are a powerful and intelligent AI capable of analyzing logs and performing reasoning";

const USER_TEMPLATE: &str = r#"Q: I am running an optimization process over an unknown function.
I am using a 1+1-ES to optimize the function.
f(x) = y indicates an evaluation.
x1 -> x2 indicates that x1, using the current step size, produced a new candidate solution x2.
It is extremely important that the step size you propose is contained between 0.999 and 0.001.
Here's the log:```txt
<LOG CONTENT>
```
I am currently using the following step size: <STEP SIZE>.
Should I change it or not?
Do you think that the current step size is good enough to make the process converge as soon as possible?
Reply with the following structure:
`Reasoning: <explanation>
Recommended step size: <new step size>`"#;

/// Renders the (system, user) message pair for one query. The step size
/// uses the shortest decimal rendering that round-trips, so e.g. 0.1
/// appears as `0.1`.
pub fn build_prompt(log_text: &str, current_sigma: f64) -> (String, String) {
    // The step-size slot is filled first so a log line could never be
    // mistaken for it.
    let user = USER_TEMPLATE
        .replace("<STEP SIZE>", &format!("{current_sigma}"))
        .replace("<LOG CONTENT>", log_text);
    (SYSTEM_MESSAGE.to_string(), user)
}

/// Length of the rendered user message with both slots empty; advisor
/// character budgets must exceed this.
pub fn template_scaffold_len() -> usize {
    USER_TEMPLATE
        .replace("<STEP SIZE>", "")
        .replace("<LOG CONTENT>", "")
        .len()
}
