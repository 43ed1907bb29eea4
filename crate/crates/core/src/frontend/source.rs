use serde::{Deserialize, Serialize};

/// A source file of the analyzed codebase together with its line table.
///
/// `line_index` holds one byte range per line, in order. Each range includes
/// the terminating newline, so concatenating all ranges reproduces `content`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "RawSourceFile", into = "RawSourceFile")]
pub struct SourceFile {
    pub path: String,
    pub content: String,
    line_index: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawSourceFile {
    path: String,
    content: String,
}

impl From<RawSourceFile> for SourceFile {
    fn from(raw: RawSourceFile) -> Self {
        SourceFile::new(raw.path, raw.content)
    }
}

impl From<SourceFile> for RawSourceFile {
    fn from(file: SourceFile) -> Self {
        RawSourceFile {
            path: file.path,
            content: file.content,
        }
    }
}

impl SourceFile {
    pub fn new(path: impl Into<String>, content: impl Into<String>) -> Self {
        let content = content.into();
        let mut line_index = Vec::new();
        let mut start = 0;
        for (pos, byte) in content.bytes().enumerate() {
            if byte == b'\n' {
                line_index.push((start, pos + 1));
                start = pos + 1;
            }
        }
        if start < content.len() {
            line_index.push((start, content.len()));
        }
        SourceFile {
            path: path.into(),
            content,
            line_index,
        }
    }

    pub fn line_count(&self) -> usize {
        self.line_index.len()
    }

    pub fn line_ranges(&self) -> &[(usize, usize)] {
        &self.line_index
    }

    /// Text of a 1-based line without its trailing newline.
    pub fn line_text(&self, line: usize) -> Option<&str> {
        let (start, end) = *self.line_index.get(line.checked_sub(1)?)?;
        Some(self.content[start..end].trim_end_matches(['\n', '\r']))
    }

    /// Verbatim text of lines `start..=end` (1-based), newlines included.
    pub fn lines_verbatim(&self, start: usize, end: usize) -> Option<&str> {
        if start == 0 || start > end || end > self.line_count() {
            return None;
        }
        let from = self.line_index[start - 1].0;
        let to = self.line_index[end - 1].1;
        Some(&self.content[from..to])
    }

    /// 1-based (line, column) of a byte offset. Columns count bytes.
    pub fn position(&self, offset: usize) -> (u32, u32) {
        let idx = match self.line_index.binary_search_by(|&(s, _)| s.cmp(&offset)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        let line_start = self.line_index.get(idx).map_or(0, |r| r.0);
        ((idx + 1) as u32, (offset - line_start + 1) as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_index_covers_content() {
        let f = SourceFile::new("a.c", "int x;\n\nint y;");
        assert_eq!(f.line_count(), 3);
        let joined: String = f.line_ranges().iter().map(|&(s, e)| &f.content[s..e]).collect();
        assert_eq!(joined, f.content);
        assert_eq!(f.line_text(2), Some(""));
        assert_eq!(f.line_text(3), Some("int y;"));
        assert_eq!(f.line_text(4), None);
    }

    #[test]
    fn positions_are_one_based() {
        let f = SourceFile::new("a.c", "ab\ncd\n");
        assert_eq!(f.position(0), (1, 1));
        assert_eq!(f.position(1), (1, 2));
        assert_eq!(f.position(3), (2, 1));
        assert_eq!(f.position(4), (2, 2));
    }

    #[test]
    fn verbatim_ranges() {
        let f = SourceFile::new("a.c", "1\n2\n3\n4\n5\n");
        assert_eq!(f.lines_verbatim(2, 4), Some("2\n3\n4\n"));
        assert_eq!(f.lines_verbatim(1, 5), Some(f.content.as_str()));
        assert_eq!(f.lines_verbatim(0, 2), None);
        assert_eq!(f.lines_verbatim(3, 2), None);
        assert_eq!(f.lines_verbatim(1, 6), None);
    }

    #[test]
    fn empty_file_has_no_lines() {
        assert_eq!(SourceFile::new("e.c", "").line_count(), 0);
    }
}
