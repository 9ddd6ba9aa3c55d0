//! Legacy ASCII VTK unstructured-grid output.
//!
//! The writer emits the classic `# vtk DataFile Version 3.0` format:
//! points padded to three coordinates, quad or hexahedron cells, and
//! optional named scalar fields on points and cells. Floating-point
//! values are printed with 17 significant digits, so parsing the file
//! back recovers every `f64` bit for bit. A minimal parser for exactly
//! this subset lives alongside the writer and backs the round-trip
//! tests.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Triangulation;

/// Lexicographic corner order mapped to VTK's counterclockwise quad.
const QUAD_CORNERS: [usize; 4] = [0, 1, 3, 2];

/// Lexicographic corner order mapped to the VTK hexahedron convention.
const HEX_CORNERS: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];

/// An unstructured grid with named scalar fields, ready to be written as
/// a legacy ASCII VTK file.
///
/// Points always carry three coordinates; for planar meshes the third is
/// zero. Cell connectivity is stored in VTK corner order, i.e. already
/// permuted away from the lexicographic order used by [`Triangulation`].
#[derive(Clone, Debug, PartialEq)]
pub struct VtkDataSet {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    /// VTK cell type shared by all cells: 9 for quads, 12 for hexahedra.
    pub cell_type: u32,
    pub point_data: Vec<(String, Vec<f64>)>,
    pub cell_data: Vec<(String, Vec<f64>)>,
}

impl VtkDataSet {
    /// Builds a grid from the active cells of a triangulation.
    ///
    /// Only vertices referenced by active cells are emitted; they are
    /// numbered by first appearance while walking cells in active-cell
    /// order and corners lexicographically. The second return value maps
    /// each grid point back to its triangulation vertex index, which is
    /// what callers need to fill point fields from a solution vector.
    pub fn from_triangulation<const D: usize>(
        tri: &Triangulation<D>,
    ) -> Result<(Self, Vec<usize>)> {
        let (order, cell_type): (&[usize], u32) = match D {
            2 => (&QUAD_CORNERS, 9),
            3 => (&HEX_CORNERS, 12),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "no VTK cell type for dimension {D}"
                )))
            }
        };

        let mut vertex_of_point = Vec::new();
        let mut point_of_vertex = HashMap::new();
        let mut cells = Vec::with_capacity(tri.n_active_cells());
        for cell in tri.active_cells() {
            let vertices = tri.cell_vertex_indices(cell);
            let local: Vec<usize> = vertices
                .iter()
                .map(|&v| {
                    *point_of_vertex.entry(v).or_insert_with(|| {
                        vertex_of_point.push(v);
                        vertex_of_point.len() - 1
                    })
                })
                .collect();
            cells.push(order.iter().map(|&o| local[o]).collect());
        }

        let points = vertex_of_point
            .iter()
            .map(|&v| {
                let p = tri.vertex(v);
                let mut padded = [0.0; 3];
                for d in 0..D {
                    padded[d] = p[d];
                }
                padded
            })
            .collect();

        let data = Self {
            title: "felab output".to_string(),
            points,
            cells,
            cell_type,
            point_data: Vec::new(),
            cell_data: Vec::new(),
        };
        Ok((data, vertex_of_point))
    }

    /// Attaches a scalar field with one value per point.
    pub fn add_point_data(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.points.len() {
            return Err(Error::LengthMismatch {
                expected: self.points.len(),
                got: values.len(),
            });
        }
        check_field_name(name)?;
        self.point_data.push((name.to_string(), values));
        Ok(())
    }

    /// Attaches a scalar field with one value per cell.
    pub fn add_cell_data(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.cells.len() {
            return Err(Error::LengthMismatch {
                expected: self.cells.len(),
                got: values.len(),
            });
        }
        check_field_name(name)?;
        self.cell_data.push((name.to_string(), values));
        Ok(())
    }

    /// Writes the data set in legacy ASCII VTK form.
    ///
    /// The `POINT_DATA` and `CELL_DATA` sections are omitted entirely
    /// when no field of the respective kind is attached.
    pub fn write(&self, out: &mut impl Write) -> Result<()> {
        for (_, values) in &self.point_data {
            if values.len() != self.points.len() {
                return Err(Error::LengthMismatch {
                    expected: self.points.len(),
                    got: values.len(),
                });
            }
        }
        for (_, values) in &self.cell_data {
            if values.len() != self.cells.len() {
                return Err(Error::LengthMismatch {
                    expected: self.cells.len(),
                    got: values.len(),
                });
            }
        }

        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "{}", self.title)?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

        writeln!(out, "POINTS {} double", self.points.len())?;
        for p in &self.points {
            writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
        }

        let total: usize = self.cells.iter().map(|c| c.len() + 1).sum();
        writeln!(out, "CELLS {} {}", self.cells.len(), total)?;
        for cell in &self.cells {
            write!(out, "{}", cell.len())?;
            for &p in cell {
                write!(out, " {p}")?;
            }
            writeln!(out)?;
        }

        writeln!(out, "CELL_TYPES {}", self.cells.len())?;
        for _ in &self.cells {
            writeln!(out, "{}", self.cell_type)?;
        }

        if !self.point_data.is_empty() {
            writeln!(out, "POINT_DATA {}", self.points.len())?;
            for (name, values) in &self.point_data {
                write_scalars(out, name, values)?;
            }
        }
        if !self.cell_data.is_empty() {
            writeln!(out, "CELL_DATA {}", self.cells.len())?;
            for (name, values) in &self.cell_data {
                write_scalars(out, name, values)?;
            }
        }
        Ok(())
    }

    /// Renders the file into a string.
    pub fn write_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("VTK output is ASCII"))
    }

    /// Writes the file to `path`, creating or truncating it.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = std::io::BufWriter::new(file);
        self.write(&mut out)
    }

    /// Parses a file produced by [`VtkDataSet::write`].
    ///
    /// This accepts only the legacy-format subset the writer emits; it
    /// exists to make round trips checkable, not to read third-party
    /// files.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        if !header.starts_with("# vtk DataFile") {
            return Err(bad("first line is not a `# vtk DataFile` header"));
        }
        let title = lines.next().ok_or_else(|| bad("missing title line"))?.to_string();

        let tokens: Vec<&str> = lines.flat_map(str::split_whitespace).collect();
        let mut k = 0;
        expect(&tokens, &mut k, "ASCII")?;
        expect(&tokens, &mut k, "DATASET")?;
        expect(&tokens, &mut k, "UNSTRUCTURED_GRID")?;

        expect(&tokens, &mut k, "POINTS")?;
        let n_points = integer(&tokens, &mut k)?;
        expect(&tokens, &mut k, "double")?;
        let mut points = Vec::with_capacity(n_points);
        for _ in 0..n_points {
            let x = float(&tokens, &mut k)?;
            let y = float(&tokens, &mut k)?;
            let z = float(&tokens, &mut k)?;
            points.push([x, y, z]);
        }

        expect(&tokens, &mut k, "CELLS")?;
        let n_cells = integer(&tokens, &mut k)?;
        let declared_total = integer(&tokens, &mut k)?;
        let mut cells = Vec::with_capacity(n_cells);
        let mut total = 0;
        for _ in 0..n_cells {
            let n_corners = integer(&tokens, &mut k)?;
            total += n_corners + 1;
            let mut cell = Vec::with_capacity(n_corners);
            for _ in 0..n_corners {
                let p = integer(&tokens, &mut k)?;
                if p >= n_points {
                    return Err(bad(&format!(
                        "connectivity index {p} exceeds the {n_points} declared points"
                    )));
                }
                cell.push(p);
            }
            cells.push(cell);
        }
        if total != declared_total {
            return Err(bad(&format!(
                "CELLS declares {declared_total} entries but lists {total}"
            )));
        }

        expect(&tokens, &mut k, "CELL_TYPES")?;
        let n_types = integer(&tokens, &mut k)?;
        if n_types != n_cells {
            return Err(bad("CELL_TYPES count disagrees with CELLS"));
        }
        let mut cell_type = 0;
        for (i, cell) in cells.iter().enumerate() {
            let t = integer(&tokens, &mut k)? as u32;
            let corners = match t {
                9 => 4,
                12 => 8,
                other => return Err(bad(&format!("unsupported cell type {other}"))),
            };
            if cell.len() != corners {
                return Err(bad(&format!(
                    "cell type {t} expects {corners} corners, cell has {}",
                    cell.len()
                )));
            }
            if i == 0 {
                cell_type = t;
            } else if t != cell_type {
                return Err(bad("mixed cell types are not supported"));
            }
        }

        let mut point_data = Vec::new();
        let mut cell_data = Vec::new();
        while k < tokens.len() {
            let section = tokens[k];
            k += 1;
            let (target, count) = match section {
                "POINT_DATA" => (&mut point_data, n_points),
                "CELL_DATA" => (&mut cell_data, n_cells),
                other => return Err(bad(&format!("unexpected token `{other}`"))),
            };
            let declared = integer(&tokens, &mut k)?;
            if declared != count {
                return Err(bad(&format!(
                    "{section} declares {declared} values, grid has {count}"
                )));
            }
            while k < tokens.len() && tokens[k] == "SCALARS" {
                k += 1;
                let name = tokens
                    .get(k)
                    .ok_or_else(|| bad("SCALARS without a field name"))?
                    .to_string();
                k += 1;
                expect(&tokens, &mut k, "double")?;
                expect(&tokens, &mut k, "1")?;
                expect(&tokens, &mut k, "LOOKUP_TABLE")?;
                expect(&tokens, &mut k, "default")?;
                let mut values = Vec::with_capacity(count);
                for _ in 0..count {
                    values.push(float(&tokens, &mut k)?);
                }
                target.push((name, values));
            }
        }

        Ok(Self {
            title,
            points,
            cells,
            cell_type,
            point_data,
            cell_data,
        })
    }
}

fn write_scalars(out: &mut impl Write, name: &str, values: &[f64]) -> Result<()> {
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

/// Field names become tokens in the file, so whitespace would corrupt it.
fn check_field_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidInput(format!(
            "VTK field name {name:?} must be nonempty and free of whitespace"
        )));
    }
    Ok(())
}

fn bad(message: &str) -> Error {
    Error::InvalidInput(format!("VTK parse: {message}"))
}

fn expect(tokens: &[&str], k: &mut usize, want: &str) -> Result<()> {
    match tokens.get(*k) {
        Some(&t) if t == want => {
            *k += 1;
            Ok(())
        }
        Some(&t) => Err(bad(&format!("expected `{want}`, found `{t}`"))),
        None => Err(bad(&format!("expected `{want}`, found end of file"))),
    }
}

fn integer(tokens: &[&str], k: &mut usize) -> Result<usize> {
    let t = tokens
        .get(*k)
        .ok_or_else(|| bad("expected an integer, found end of file"))?;
    *k += 1;
    t.parse()
        .map_err(|_| bad(&format!("expected an integer, found `{t}`")))
}

fn float(tokens: &[&str], k: &mut usize) -> Result<f64> {
    let t = tokens
        .get(*k)
        .ok_or_else(|| bad("expected a number, found end of file"))?;
    *k += 1;
    t.parse()
        .map_err(|_| bad(&format!("expected a number, found `{t}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::mesh::{hyper_cube, hyper_shell_2d};

    #[test]
    fn unit_quad_uses_the_vtk_corner_order() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let (data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        let text = data.write_string().unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("\nPOINTS 4 double\n"));
        assert!(text.contains("\nCELLS 1 5\n4 0 1 3 2\n"));
        assert!(text.contains("\nCELL_TYPES 1\n9\n"));
    }

    #[test]
    fn unit_hex_uses_the_vtk_corner_order() {
        let tri: Triangulation<3> = hyper_cube(0.0, 1.0, 1).unwrap();
        let (data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        let text = data.write_string().unwrap();
        assert!(text.contains("\nCELLS 1 9\n8 0 1 3 2 4 5 7 6\n"));
        assert!(text.contains("\nCELL_TYPES 1\n12\n"));
    }

    #[test]
    fn planar_points_are_padded_with_a_zero_third_coordinate() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let (data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        let text = data.write_string().unwrap();
        for line in text
            .lines()
            .skip_while(|l| !l.starts_with("POINTS"))
            .skip(1)
            .take(4)
        {
            let coords: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(coords.len(), 3);
            assert_eq!(coords[2].parse::<f64>().unwrap(), 0.0);
        }
    }

    #[test]
    fn only_active_vertices_are_written() {
        let mut tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
        let first = tri.active_cells().next().unwrap();
        tri.set_refine_flag(first).unwrap();
        tri.execute_refinement().unwrap();

        let (data, vertex_of_point) = VtkDataSet::from_triangulation(&tri).unwrap();
        assert_eq!(data.cells.len(), tri.n_active_cells());
        assert_eq!(data.points.len(), vertex_of_point.len());

        let mut seen = std::collections::HashSet::new();
        for (point, &vertex) in vertex_of_point.iter().enumerate() {
            assert!(seen.insert(vertex), "vertex listed twice");
            let p = tri.vertex(vertex);
            assert_eq!(data.points[point][0], p[0]);
            assert_eq!(data.points[point][1], p[1]);
        }
        let expected: std::collections::HashSet<usize> = tri
            .active_cells()
            .flat_map(|c| tri.cell_vertex_indices(c).to_vec())
            .collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn round_trip_recovers_every_bit() {
        let mut tri = hyper_shell_2d(Point::new([0.0, 0.0]), 0.5, 1.0, 6).unwrap();
        tri.refine_global(1).unwrap();
        let first = tri.active_cells().next().unwrap();
        tri.set_refine_flag(first).unwrap();
        tri.execute_refinement().unwrap();

        let (mut data, vertex_of_point) = VtkDataSet::from_triangulation(&tri).unwrap();
        let field: Vec<f64> = vertex_of_point
            .iter()
            .map(|&v| {
                let p = tri.vertex(v);
                (3.1 * p[0]).sin() * (1.7 * p[1]).cos()
            })
            .collect();
        data.add_point_data("u", field).unwrap();
        let levels: Vec<f64> = tri.active_cells().map(|c| c.level as f64).collect();
        data.add_cell_data("level", levels).unwrap();

        let text = data.write_string().unwrap();
        let parsed = VtkDataSet::parse(&text).unwrap();

        assert_eq!(parsed.cells, data.cells);
        assert_eq!(parsed.cell_type, data.cell_type);
        assert_eq!(parsed.points.len(), data.points.len());
        for (a, b) in parsed.points.iter().zip(&data.points) {
            for d in 0..3 {
                assert_eq!(a[d].to_bits(), b[d].to_bits());
            }
        }
        assert_eq!(parsed.point_data.len(), 1);
        assert_eq!(parsed.cell_data.len(), 1);
        for ((na, va), (nb, vb)) in parsed
            .point_data
            .iter()
            .chain(&parsed.cell_data)
            .zip(data.point_data.iter().chain(&data.cell_data))
        {
            assert_eq!(na, nb);
            for (a, b) in va.iter().zip(vb) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        // A second write of the parsed data reproduces the file verbatim.
        assert_eq!(parsed.write_string().unwrap(), text);
    }

    #[test]
    fn data_sections_are_omitted_when_empty() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let (mut data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        let text = data.write_string().unwrap();
        assert!(!text.contains("POINT_DATA"));
        assert!(!text.contains("CELL_DATA"));

        data.add_cell_data("material", vec![7.0]).unwrap();
        let text = data.write_string().unwrap();
        assert!(!text.contains("POINT_DATA"));
        assert!(text.contains("\nCELL_DATA 1\nSCALARS material double 1\nLOOKUP_TABLE default\n"));
    }

    #[test]
    fn field_lengths_are_checked() {
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let (mut data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        match data.add_point_data("u", vec![1.0; 3]) {
            Err(Error::LengthMismatch { expected: 4, got: 3 }) => {}
            other => panic!("expected a length mismatch, got {other:?}"),
        }
        match data.add_cell_data("level", vec![0.0; 2]) {
            Err(Error::LengthMismatch { expected: 1, got: 2 }) => {}
            other => panic!("expected a length mismatch, got {other:?}"),
        }
        assert!(data.add_point_data("two words", vec![0.0; 4]).is_err());
    }

    #[test]
    fn parser_rejects_malformed_input() {
        assert!(VtkDataSet::parse("").is_err());
        assert!(VtkDataSet::parse("not a vtk file\nat all\n").is_err());

        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 1).unwrap();
        let (data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        let text = data.write_string().unwrap();
        let truncated = &text[..text.len() - 20];
        assert!(VtkDataSet::parse(truncated).is_err());
        let wrong_type = text.replace("\nCELL_TYPES 1\n9\n", "\nCELL_TYPES 1\n10\n");
        assert!(VtkDataSet::parse(&wrong_type).is_err());
    }

    #[test]
    fn saves_to_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.vtk");
        let tri: Triangulation<2> = hyper_cube(0.0, 1.0, 2).unwrap();
        let (data, _) = VtkDataSet::from_triangulation(&tri).unwrap();
        data.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(VtkDataSet::parse(&text).unwrap(), data);
    }
}
