#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "scsqkd/core.hpp"
#include "scsqkd/document.hpp"

namespace scsqkd {

inline constexpr std::string_view kDatasetSchema = "scsqkd/dataset v1";

struct Dataset {
  ProtocolParams params;
  CountTable counts;
};

inline Dataset dataset_from_document(const Document& doc) {
  doc.require_schema(kDatasetSchema);
  Dataset ds;
  ProtocolParams& p = ds.params;
  p.n_windows = doc.get_count("params", "n_windows");
  p.p_send = doc.get_num("params", "p_send");
  p.mu_a = doc.get_num("params", "mu_a");
  p.mu_b = doc.get_num("params", "mu_b");
  p.mu_a_up = doc.get_num("params", "mu_a_up");
  p.mu_b_up = doc.get_num("params", "mu_b_up");
  p.mu_vac_up = doc.get_num("params", "mu_vac_up");
  p.ec_inefficiency = doc.get_num_or("params", "ec_inefficiency", 1.16);
  p.dimension_d = static_cast<int>(doc.get_num_or("params", "dimension_d", 8));
  p.effective_rate_mhz = doc.get_num_or("params", "effective_rate_mhz", 100.0);
  p.validate();

  CountTable& c = ds.counts;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const std::string ab = std::to_string(a) + std::to_string(b);
      c.sent[a][b] = doc.get_count("counts", "sent_" + ab);
      for (int ch = 0; ch < 2; ++ch)
        c.detected[a][b][ch] = doc.get_count("counts", "detected_" + ab + "_ch" +
                                                           std::to_string(ch));
    }
  c.validate(p.n_windows);
  return ds;
}

inline Document dataset_to_document(const ProtocolParams& params, const CountTable& counts) {
  Document doc;
  doc.set_schema(std::string(kDatasetSchema));
  doc.set_count("params", "n_windows", params.n_windows);
  doc.set_num("params", "p_send", params.p_send);
  doc.set_num("params", "mu_a", params.mu_a);
  doc.set_num("params", "mu_b", params.mu_b);
  doc.set_num("params", "mu_a_up", params.mu_a_up);
  doc.set_num("params", "mu_b_up", params.mu_b_up);
  doc.set_num("params", "mu_vac_up", params.mu_vac_up);
  doc.set_num("params", "ec_inefficiency", params.ec_inefficiency);
  doc.set_count("params", "dimension_d", static_cast<std::uint64_t>(params.dimension_d));
  doc.set_num("params", "effective_rate_mhz", params.effective_rate_mhz);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const std::string ab = std::to_string(a) + std::to_string(b);
      doc.set_count("counts", "sent_" + ab, counts.sent[a][b]);
      for (int ch = 0; ch < 2; ++ch)
        doc.set_count("counts", "detected_" + ab + "_ch" + std::to_string(ch),
                      counts.detected[a][b][ch]);
    }
  return doc;
}

// Loads and validates a dataset file; throws parse_error on malformed input
// and invariant_error (naming the offending field) on inconsistent content.
inline Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_document(Document::load(path));
}

namespace detail {

struct EmbeddedDataset {
  std::string_view name;
  std::string_view text;
};

// Measured run data at the five quantum-link lengths, as published. The
// vacuum-intensity bound is max(mu_a_up, mu_b_up) scaled by the 70 dB
// extinction-ratio floor.
inline constexpr std::array<EmbeddedDataset, 5> kEmbeddedDatasets{{
    {"paper_0km", R"(schema = scsqkd/dataset v1

[params]
n_windows = 363000000000
p_send = 0.2
mu_a = 0.0174
mu_b = 0.0348
mu_a_up = 0.0178
mu_b_up = 0.0356
mu_vac_up = 3.56e-09
ec_inefficiency = 1.16
dimension_d = 8
effective_rate_mhz = 100

[counts]
sent_00 = 231594000000
sent_01 = 58806000000
sent_10 = 58806000000
sent_11 = 13794000000
detected_00_ch0 = 1638729
detected_00_ch1 = 4149624
detected_01_ch0 = 301133352
detected_01_ch1 = 312923338
detected_10_ch0 = 330999032
detected_10_ch1 = 346403215
detected_11_ch0 = 6117941
detected_11_ch1 = 306850280
)"},
    {"paper_25p3km", R"(schema = scsqkd/dataset v1

[params]
n_windows = 363000000000
p_send = 0.2
mu_a = 0.0137
mu_b = 0.0137
mu_a_up = 0.014
mu_b_up = 0.014
mu_vac_up = 1.4e-09
ec_inefficiency = 1.16
dimension_d = 8
effective_rate_mhz = 100

[counts]
sent_00 = 231594000000
sent_01 = 58806000000
sent_10 = 58806000000
sent_11 = 13794000000
detected_00_ch0 = 34857
detected_00_ch1 = 42620
detected_01_ch0 = 93778052
detected_01_ch1 = 96053698
detected_10_ch0 = 89590603
detected_10_ch1 = 92394051
detected_11_ch0 = 2737041
detected_11_ch1 = 88868203
)"},
    {"paper_50p5km", R"(schema = scsqkd/dataset v1

[params]
n_windows = 363000000000
p_send = 0.2
mu_a = 0.0061
mu_b = 0.0122
mu_a_up = 0.0062
mu_b_up = 0.0124
mu_vac_up = 1.24e-09
ec_inefficiency = 1.16
dimension_d = 8
effective_rate_mhz = 100

[counts]
sent_00 = 231594000000
sent_01 = 58806000000
sent_10 = 58806000000
sent_11 = 13794000000
detected_00_ch0 = 35275
detected_00_ch1 = 36922
detected_01_ch0 = 40806039
detected_01_ch1 = 41754462
detected_10_ch0 = 39004871
detected_10_ch1 = 40119263
detected_11_ch0 = 1002113
detected_11_ch1 = 39536414
)"},
    {"paper_75p7km", R"(schema = scsqkd/dataset v1

[params]
n_windows = 363000000000
p_send = 0.2
mu_a = 0.0045
mu_b = 0.0045
mu_a_up = 0.0046
mu_b_up = 0.0046
mu_vac_up = 4.6e-10
ec_inefficiency = 1.16
dimension_d = 8
effective_rate_mhz = 100

[counts]
sent_00 = 231594000000
sent_01 = 58806000000
sent_10 = 58806000000
sent_11 = 13794000000
detected_00_ch0 = 48849
detected_00_ch1 = 54023
detected_01_ch0 = 11213924
detected_01_ch1 = 11452902
detected_10_ch0 = 11920527
detected_10_ch1 = 12256893
detected_11_ch0 = 305360
detected_11_ch1 = 11998373
)"},
    {"paper_101p1km", R"(schema = scsqkd/dataset v1

[params]
n_windows = 1126000000000
p_send = 0.2
mu_a = 0.0019
mu_b = 0.0038
mu_a_up = 0.0019
mu_b_up = 0.0039
mu_vac_up = 3.9e-10
ec_inefficiency = 1.16
dimension_d = 8
effective_rate_mhz = 100

[counts]
sent_00 = 718388000000
sent_01 = 182412000000
sent_10 = 182412000000
sent_11 = 42788000000
detected_00_ch0 = 29694
detected_00_ch1 = 27847
detected_01_ch0 = 11733761
detected_01_ch1 = 12213595
detected_10_ch0 = 11622299
detected_10_ch1 = 12178754
detected_11_ch0 = 557067
detected_11_ch1 = 12903180
)"},
}};

}  // namespace detail

inline std::vector<std::string_view> embedded_dataset_names() {
  std::vector<std::string_view> names;
  for (const auto& e : detail::kEmbeddedDatasets) names.push_back(e.name);
  return names;
}

inline std::string_view embedded_dataset_text(std::string_view name) {
  for (const auto& e : detail::kEmbeddedDatasets)
    if (e.name == name) return e.text;
  throw parse_error("unknown embedded dataset '" + std::string(name) + "'");
}

inline Dataset embedded_dataset(std::string_view name) {
  return dataset_from_document(Document::parse(embedded_dataset_text(name)));
}

// CLI-facing resolution: embedded fixture names take precedence, anything else
// is a filesystem path.
inline Dataset resolve_dataset(std::string_view name_or_path) {
  for (const auto& e : detail::kEmbeddedDatasets)
    if (e.name == name_or_path) return embedded_dataset(name_or_path);
  return load_dataset(std::filesystem::path(std::string(name_or_path)));
}

}  // namespace scsqkd
