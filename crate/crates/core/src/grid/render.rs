use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{number_cells, CellLetters, ClueLists, CrosswordLayout, GridError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RenderFormat {
    #[default]
    Text,
    Html,
    Printable,
}

impl std::str::FromStr for RenderFormat {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(RenderFormat::Text),
            "html" => Ok(RenderFormat::Html),
            "printable" => Ok(RenderFormat::Printable),
            other => Err(GridError::Parse(format!("unknown render format {other:?}"))),
        }
    }
}

/// Solution shows letters; Blank shows open cells only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum View {
    #[default]
    Solution,
    Blank,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn text_grid(layout: &CrosswordLayout, view: View) -> String {
    let cells = layout.cell_letters();
    let mut out = String::new();
    for r in 0..layout.rows {
        for c in 0..layout.cols {
            out.push(match (cells.get(&(r, c)), view) {
                (None, _) => '#',
                (Some(&ch), View::Solution) => ch,
                (Some(_), View::Blank) => '.',
            });
        }
        out.push('\n');
    }
    out
}

fn numbers(layout: &CrosswordLayout) -> BTreeMap<(usize, usize), u32> {
    layout.placements.iter().map(|p| ((p.row, p.col), p.number)).collect()
}

fn printable(layout: &CrosswordLayout, lists: &ClueLists, view: View) -> String {
    let cells = layout.cell_letters();
    let nums = numbers(layout);
    let mut out = String::new();
    for r in 0..layout.rows {
        for c in 0..layout.cols {
            let cell = match cells.get(&(r, c)) {
                None => "####".to_string(),
                Some(&ch) => {
                    let n = nums.get(&(r, c)).map_or(String::new(), |n| n.to_string());
                    let fill = if view == View::Solution { ch } else { ' ' };
                    format!("{n:<2}{fill} ")
                }
            };
            out.push_str(&cell);
        }
        out.push('\n');
    }
    for (title, list) in [("ACROSS", &lists.across), ("DOWN", &lists.down)] {
        let _ = writeln!(out, "\n{title}");
        for e in list {
            let _ = writeln!(out, "{:>3}. {} ({})", e.number, e.clue, e.answer.chars().count());
        }
    }
    out
}

fn html(layout: &CrosswordLayout, lists: &ClueLists, view: View) -> String {
    let cells = layout.cell_letters();
    let nums = numbers(layout);
    let mut out = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Crossword</title>\n<style>\n\
         table.grid{border-collapse:collapse}\n\
         .grid td{width:2em;height:2em;border:1px solid #333;position:relative;text-align:center;vertical-align:middle;font-family:sans-serif}\n\
         .grid td.block{background:#222}\n\
         .grid .num{position:absolute;top:1px;left:2px;font-size:0.6em}\n\
         </style>\n</head>\n<body>\n<table class=\"grid\">\n",
    );
    for r in 0..layout.rows {
        out.push_str("<tr>");
        for c in 0..layout.cols {
            match cells.get(&(r, c)) {
                None => out.push_str("<td class=\"block\"></td>"),
                Some(&ch) => {
                    out.push_str("<td>");
                    if let Some(n) = nums.get(&(r, c)) {
                        let _ = write!(out, "<span class=\"num\">{n}</span>");
                    }
                    if view == View::Solution {
                        out.push(ch);
                    }
                    out.push_str("</td>");
                }
            }
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");
    for (title, list) in [("Across", &lists.across), ("Down", &lists.down)] {
        let _ = writeln!(out, "<h2>{title}</h2>\n<ol class=\"{}\">", title.to_lowercase());
        for e in list {
            let _ = writeln!(out, "<li value=\"{}\">{} ({})</li>", e.number, escape(&e.clue), e.answer.chars().count());
        }
        out.push_str("</ol>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}

pub fn render(layout: &CrosswordLayout, format: RenderFormat, view: View) -> String {
    let mut numbered = layout.clone();
    let lists = number_cells(&mut numbered);
    match format {
        RenderFormat::Text => text_grid(&numbered, view),
        RenderFormat::Printable => printable(&numbered, &lists, view),
        RenderFormat::Html => html(&numbered, &lists, view),
    }
}

/// Parses the text format back into `(rows, cols, cells)`, where `cells`
/// maps every open cell to its letter, or to `.` in the blank view.
pub fn parse_text(text: &str) -> Result<(usize, usize, CellLetters), GridError> {
    let lines: Vec<&str> = text.lines().collect();
    let cols = lines.first().map_or(0, |l| l.chars().count());
    let mut cells = BTreeMap::new();
    for (r, line) in lines.iter().enumerate() {
        if line.chars().count() != cols {
            return Err(GridError::Parse(format!("row {r} has {} cells, expected {cols}", line.chars().count())));
        }
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '#' => {}
                '.' => {
                    cells.insert((r, c), '.');
                }
                ch if ch.is_alphabetic() => {
                    cells.insert((r, c), ch);
                }
                other => return Err(GridError::Parse(format!("unexpected {other:?} at ({r},{c})"))),
            }
        }
    }
    Ok((lines.len(), cols, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Direction, Placement};

    fn crossing() -> CrosswordLayout {
        let p = |w: &str, r, c, d| Placement {
            word: w.into(),
            keyword: w.into(),
            row: r,
            col: c,
            direction: d,
            clue: format!("<{w}> & co"),
            number: 0,
        };
        CrosswordLayout {
            rows: 3,
            cols: 3,
            placements: vec![p("CAT", 1, 0, Direction::Across), p("TAR", 0, 1, Direction::Down)],
            unplaced: vec![],
        }
    }

    #[test]
    fn one_word_text() {
        let l = CrosswordLayout {
            rows: 1,
            cols: 8,
            placements: vec![Placement {
                word: "ROBOCALL".into(),
                keyword: "Robocall".into(),
                row: 0,
                col: 0,
                direction: Direction::Across,
                clue: "c".into(),
                number: 0,
            }],
            unplaced: vec![],
        };
        assert_eq!(render(&l, RenderFormat::Text, View::Solution), "ROBOCALL\n");
    }

    #[test]
    fn text_round_trip_and_blank() {
        let l = crossing();
        let text = render(&l, RenderFormat::Text, View::Solution);
        assert_eq!(text, "#T#\nCAT\n#R#\n");
        let (rows, cols, cells) = parse_text(&text).unwrap();
        assert_eq!((rows, cols), (3, 3));
        assert_eq!(cells, l.cell_letters());
        let blank = render(&l, RenderFormat::Text, View::Blank);
        assert!(!blank.chars().any(char::is_alphabetic));
        assert_eq!(parse_text(&blank).unwrap().2.len(), 5);
    }

    #[test]
    fn html_and_printable_carry_clues() {
        let l = crossing();
        let h = render(&l, RenderFormat::Html, View::Blank);
        assert!(h.contains("&lt;CAT&gt; &amp; co"));
        assert!(h.contains("<span class=\"num\">1</span>"));
        assert!(!h.contains(">C<"));
        let p = render(&l, RenderFormat::Printable, View::Solution);
        assert!(p.contains("ACROSS") && p.contains("2. <CAT> & co (3)"));
    }

    #[test]
    fn parse_rejects_ragged() {
        assert!(parse_text("##\n#").is_err());
        assert!(parse_text("#1").is_err());
    }
}
