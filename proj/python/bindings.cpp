#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cellaudit/analyze.hpp"
#include "cellaudit/cellmap.hpp"
#include "cellaudit/lint.hpp"
#include "cellaudit/report.hpp"
#include "cellaudit/wbt.hpp"

namespace py = pybind11;
using namespace cellaudit;

namespace {

py::object to_python(const Value& v) {
    return std::visit(
        [](const auto& x) -> py::object {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Blank>) {
                return py::none();
            } else if constexpr (std::is_same_v<T, ErrorValue>) {
                return py::str(std::string(error_text(x.code)));
            } else {
                return py::cast(x);
            }
        },
        v);
}

Value from_python(const py::handle& h) {
    if (h.is_none()) return Blank{};
    if (py::isinstance<py::bool_>(h)) return h.cast<bool>();
    if (py::isinstance<py::int_>(h) || py::isinstance<py::float_>(h)) return h.cast<double>();
    return h.cast<std::string>();
}

CellAddress address_arg(const Workbook& wb, const std::string& text) {
    auto a = parse_address(text);
    if (!a) throw py::value_error("malformed cell address '" + text + "'");
    if (a->sheet.empty() && !wb.sheets.empty()) a->sheet = wb.sheets.front().name;
    return *a;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Workbook parsing, evaluation and audit checks.";
    m.attr("__version__") = CELLAUDIT_VERSION;

    py::register_exception<wbt::ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<Workbook>(m, "Workbook")
        .def_property_readonly("sheets",
                               [](const Workbook& wb) {
                                   std::vector<std::string> out;
                                   for (const auto& s : wb.sheets) out.push_back(s.name);
                                   return out;
                               })
        .def("serialize", &wbt::serialize_workbook)
        .def("fingerprint", &wbt::fingerprint);

    m.def("parse", &wbt::parse_workbook, py::arg("text"));
    m.def("load", &wbt::load_file, py::arg("path"));

    m.def(
        "recalculate",
        [](const Workbook& wb, const py::dict& overrides) {
            eval::Overrides ov;
            for (auto [k, v] : overrides) ov[address_arg(wb, k.cast<std::string>())] = from_python(v);
            py::dict out;
            for (const auto& [a, v] : eval::recalculate(wb, ov)) out[py::str(qualified_r1c1(a))] = to_python(v);
            return out;
        },
        py::arg("workbook"), py::arg("overrides") = py::dict());

    m.def("grid_table", [](const Workbook& wb) { return report::grid_table(wb, eval::recalculate(wb)); });
    m.def("names_table", &report::names_table);
    m.def("validations_table", &report::validations_table);
    m.def("formula_listing", &report::formula_listing);
    m.def("cell_map", &cellmap::render_text);

    m.def(
        "format_value",
        [](const py::handle& v, const std::string& code) { return format_value(from_python(v), code).text; },
        py::arg("value"), py::arg("code"));

    m.def("cascade_risk", &analyze::cascade_risk, py::arg("e"), py::arg("n"));

    m.def(
        "cascade_histogram",
        [](const Workbook& wb, bool rows) {
            auto g = graph::build_graph(wb);
            auto d = rows ? graph::row_digraph(g, wb) : graph::cell_digraph(g);
            return analyze::enumerate_cascades(d, {1000000, false}).histogram;
        },
        py::arg("workbook"), py::arg("rows") = false);

    m.def(
        "lint",
        [](const Workbook& wb, bool allow_carry) {
            lint::Config cfg;
            cfg.allow_column_carry = allow_carry;
            std::vector<py::tuple> out;
            for (const auto& f : lint::lint(wb, cfg)) {
                out.push_back(py::make_tuple(f.code, to_r1c1(f.where), std::string(lint::severity_name(f.severity)),
                                             f.message));
            }
            return out;
        },
        py::arg("workbook"), py::arg("allow_carry") = false);

    m.def(
        "sensitivity",
        [](const Workbook& wb, const std::string& input, double delta, const std::vector<std::string>& watch) {
            std::vector<CellAddress> cells;
            for (const auto& w : watch) cells.push_back(address_arg(wb, w));
            py::dict out;
            for (const auto& [a, v] : analyze::sensitivity(wb, address_arg(wb, input), delta, cells)) {
                out[py::str(to_r1c1(a))] = to_python(v);
            }
            return out;
        },
        py::arg("workbook"), py::arg("input"), py::arg("delta"), py::arg("watch"));
}
