// Thin JSON-in, JSON-out bindings; the Python package wraps them with dicts.

#include "toeplitz_hc/conditions.hpp"
#include "toeplitz_hc/error.hpp"
#include "toeplitz_hc/examples.hpp"
#include "toeplitz_hc/operator.hpp"
#include "toeplitz_hc/valence.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace toeplitz_hc;

namespace {

Symbol parse_symbol(const std::string &text)
{
    const json j = json::parse(text);
    return Symbol::from_json(j.contains("symbol") ? j.at("symbol") : j);
}

std::string example(const std::string &id, const std::string &params)
{
    return examples::example_symbol(id, json::parse(params)).to_json().dump();
}

std::string classify(const std::string &symbol, int grid)
{
    conditions::ClassifyOptions co;
    co.plane.region.grid_n = grid;
    return conditions::classify(parse_symbol(symbol), co).to_json().dump();
}

int preimage_count(const std::string &symbol, cplx w, double rho)
{
    return valence::preimage_count(parse_symbol(symbol), w, rho);
}

std::vector<cplx> section_apply(const std::string &symbol, const std::vector<cplx> &x, bool dense)
{
    const op::ToeplitzSection s = op::ToeplitzSection::from_symbol(parse_symbol(symbol), static_cast<int>(x.size()));
    return dense ? s.apply_dense(x) : s.apply_fft(x);
}

py::list eigenvectors(const std::string &symbol, cplx lambda, int n)
{
    const Symbol sym = parse_symbol(symbol);
    const op::ToeplitzSection sec = op::ToeplitzSection::from_symbol(sym, n);
    py::list rows;
    for (const op::EigenvectorSpec &spec : op::monomial_specs(sym, lambda)) {
        const op::EigenvectorResult r = op::eigenvector(sym, spec, sec);
        py::dict d;
        d["n"] = r.n;
        d["residual"] = r.residual;
        d["tail_bound"] = r.tail_bound;
        d["coeffs"] = py::cast(r.coeffs);
        rows.append(d);
    }
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    static py::exception<Error> error(m, "ToeplitzError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error &e) {
            error(e.what());
        } catch (const json::exception &e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });
    m.def("example_ids", &examples::example_ids);
    m.def("example", &example, py::arg("id"), py::arg("params") = "{}");
    m.def("classify", &classify, py::arg("symbol"), py::arg("grid") = 512);
    m.def("preimage_count", &preimage_count, py::arg("symbol"), py::arg("w"), py::arg("rho") = 1.0);
    m.def("section_apply", &section_apply, py::arg("symbol"), py::arg("x"), py::arg("dense") = false);
    m.def("eigenvectors", &eigenvectors, py::arg("symbol"), py::arg("lam"), py::arg("n") = 512);
}
