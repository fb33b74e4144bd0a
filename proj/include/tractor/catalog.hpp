#pragma once
#include <map>
#include <string>
#include <vector>

#include "tractor/killing_analysis.hpp"

namespace tractor {
namespace catalog {

struct ReferenceData {
    int expected_rank = -1;          // -1: no expectation
    bool rank_is_lower_bound = false;
    std::string expected_class;      // empty: no expectation
    std::string notes;               // provenance of the expectations
};

struct CatalogEntry {
    std::string name;
    std::map<std::string, double> params;
    Chart chart;
    std::vector<VectorField> fields;
    ReferenceData reference;
    std::string docs;
    std::optional<SparlingCertificate> gate;  // set for the Fefferman entries
};

std::vector<std::string> valid_names();

// Throws ValidationError listing valid names for unknown entries; Fefferman
// entries run their certificate gate during construction and throw
// NumericalError with the certificate summary when it fails.
CatalogEntry get_chart(const std::string& name, const std::map<std::string, double>& params = {});

ReferenceData reference_data(const std::string& name);

const VectorField& get_field(const CatalogEntry& entry, const std::string& name);

struct NamedRescaling {
    std::string name;
    ScalarJetField phi;
};
std::vector<NamedRescaling> rescalings();

// flat-model generator V(x) = m + A x + a x - l(x) x + (1/2) <x,x> Jn l^T
VectorField moebius_field(const Signature& sig, const Vec& m, const Mat& A, double a,
                          const RowVec& l, const std::string& name);

} // namespace catalog
} // namespace tractor
