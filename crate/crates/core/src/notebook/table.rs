//! HTML table detection and row extraction for table outputs.

use scraper::{Html, Selector};

fn selector(css: &str) -> Selector {
    Selector::parse(css).expect("static selector")
}

pub fn contains_table(html: &str) -> bool {
    Html::parse_fragment(html).select(&selector("table")).next().is_some()
}

/// Cell texts of the first `<table>`, row by row. Header and data cells are
/// treated alike.
pub fn rows(html: &str) -> Vec<Vec<String>> {
    let fragment = Html::parse_fragment(html);
    let Some(table) = fragment.select(&selector("table")).next() else {
        return Vec::new();
    };
    let cell_sel = selector("th, td");
    table
        .select(&selector("tr"))
        .map(|tr| {
            tr.select(&cell_sel)
                .map(|cell| cell.text().collect::<String>().split_whitespace().collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
        })
        .filter(|row| !row.is_empty())
        .collect()
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders rows as a minimal HTML table.
pub fn to_html(rows: &[Vec<String>]) -> String {
    let mut html = String::from("<table>");
    for row in rows {
        html.push_str("<tr>");
        for cell in row {
            html.push_str("<td>");
            html.push_str(&escape(cell));
            html.push_str("</td>");
        }
        html.push_str("</tr>");
    }
    html.push_str("</table>");
    html
}

/// Converts a column-aligned plain-text result (pandas `Series`/`DataFrame`
/// repr) into an HTML table: one row per line, columns split on runs of two
/// or more spaces. Returns `None` for single-line results.
pub fn plain_text_table(text: &str) -> Option<String> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() < 2 {
        return None;
    }
    let splitter = regex::Regex::new(r"\s{2,}").expect("static regex");
    let rows: Vec<Vec<String>> = lines
        .iter()
        .map(|line| splitter.split(line.trim()).map(str::to_string).collect())
        .collect();
    Some(to_html(&rows))
}
