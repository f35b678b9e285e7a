/// English clitics split off the end of a word.
const CLITICS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

/// True when the token holds no letters or digits.
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(char::is_alphanumeric)
}

/// Splits text on whitespace, then splits punctuation off word boundaries.
///
/// Each punctuation character becomes its own token, except inside a word
/// (`well-known`, `3.5`) and except for clitics (`York's` gives `York`,
/// `'s`). Concatenating the output equals the input with whitespace removed.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut out);
    }
    out
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            word.push(c);
            i += 1;
            continue;
        }
        if !word.is_empty() {
            if let Some(clitic) = clitic_at(&chars, i, &word) {
                // "n't" borrows the trailing n from the word ("don't" -> "do", "n't").
                let start = if clitic == "n't" { i - 1 } else { i };
                if clitic == "n't" {
                    word.pop();
                }
                let end = start + clitic.chars().count();
                out.push(std::mem::take(&mut word));
                out.push(chars[start..end].iter().collect());
                i = end;
                continue;
            }
            let joins = matches!(c, '-' | '.' | '\'' | ',' | '_')
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
                && !(c == ',' && !word.chars().all(|w| w.is_ascii_digit()))
                && !(c == '.' && !word.chars().last().is_some_and(|w| w.is_ascii_digit()));
            if joins {
                word.push(c);
                i += 1;
                continue;
            }
            out.push(std::mem::take(&mut word));
        }
        out.push(c.to_string());
        i += 1;
    }
    if !word.is_empty() {
        out.push(word);
    }
}

/// Returns the clitic starting at `chars[i]` if it ends the word there.
fn clitic_at(chars: &[char], i: usize, word: &str) -> Option<&'static str> {
    if chars[i] != '\'' {
        return None;
    }
    let rest: String = chars[i + 1..]
        .iter()
        .take_while(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase();
    if rest == "t" && word.len() > 1 && word.ends_with(['n', 'N']) {
        return Some("n't");
    }
    CLITICS
        .iter()
        .copied()
        .filter(|c| *c != "n't")
        .find(|c| c[1..] == rest)
}
