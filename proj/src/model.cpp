#include "dynfit/model.hpp"

namespace dynfit {

SparseModel make_model(FunctionalLibrary lib,
                       const std::vector<std::tuple<int, std::vector<int>, double>>& entries) {
    lib.deactivate_all();
    SparseModel model(std::move(lib));
    for (const auto& [var, exponents, value] : entries) {
        const long term = model.lib.find_term(exponents);
        if (term < 0) throw MismatchedLibrary("term not present in library");
        model.lib.set_active(var, term, true);
        model.coef(var, term) = value;
    }
    return model;
}

}  // namespace dynfit
