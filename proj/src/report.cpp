#include <cstdio>

#include "quotemix/harness.hpp"

namespace quotemix {

namespace {

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string cell_text(const std::optional<MeanStd>& m, int precision) {
  if (!m) return "absent";
  return fixed(m->mean, precision) + " ± " + fixed(m->std, precision) + " (n=" + std::to_string(m->n) + ")";
}

std::string mean_col(const std::optional<MeanStd>& m, int precision) {
  return m ? fixed(m->mean, precision) : "NA";
}

std::string std_col(const std::optional<MeanStd>& m, int precision) {
  return m ? fixed(m->std, precision) : "NA";
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> written;

  std::string table = "method\tDistinct-2 ↑\tPairwise BLEU ↓\tSelf-BLEU ↓\tDisfluency ↓\tUnfaithfulness ↓\n";
  for (const auto& m : report.methods) {
    const auto& r = report.overall.at(m);
    table += m + "\t" + cell_text(r.distinct2, 4) + "\t" + cell_text(r.pairwise_bleu, 4) + "\t" +
             cell_text(r.self_bleu, 4) + "\t" + cell_text(r.disfluency, 2) + "\t" +
             cell_text(r.unfaithfulness, 2) + "\n";
  }

  std::string domains =
      "domain\tmethod\tcells\tdistinct2_mean\tdistinct2_std\tpairwise_bleu_mean\tpairwise_bleu_std\t"
      "self_bleu_mean\tself_bleu_std\n";
  for (auto d : kAllDomains) {
    for (const auto& m : report.methods) {
      std::optional<MetricRow> row;
      if (auto it = report.per_domain.find(m); it != report.per_domain.end()) {
        if (auto jt = it->second.find(d); jt != it->second.end()) row = jt->second;
      }
      domains += std::string(to_string(d)) + "\t" + m + "\t" + std::to_string(row ? row->cells : 0);
      for (const auto* metric : {row ? &row->distinct2 : nullptr, row ? &row->pairwise_bleu : nullptr,
                                 row ? &row->self_bleu : nullptr}) {
        const std::optional<MeanStd> v = metric ? *metric : std::nullopt;
        domains += "\t" + mean_col(v, 4) + "\t" + std_col(v, 4);
      }
      domains += "\n";
    }
  }

  std::string radar = "domain\tseries\twins\tlosses\tties\thook_score\tcapped\n";
  for (auto d : kAllDomains) {
    radar += std::string(to_string(d)) + "\tself\tNA\tNA\tNA\t" + fixed(1.0, 4) + "\tfalse\n";
    for (const auto& b : report.baselines) {
      const HookRow* row = nullptr;
      for (const auto& h : report.hook) {
        if (h.baseline == b && h.domain == d) row = &h;
      }
      radar += std::string(to_string(d)) + "\t" + b + "\t";
      if (row) {
        radar += std::to_string(row->wins) + "\t" + std::to_string(row->losses) + "\t" + std::to_string(row->ties) +
                 "\t" + fixed(row->score.value, 4) + "\t" + (row->score.capped ? "true" : "false") + "\n";
      } else {
        radar += "NA\tNA\tNA\tNA\tfalse\n";
      }
    }
  }

  const std::pair<const char*, std::string> files[] = {
      {"table3.tsv", table},
      {"diversity_by_domain.tsv", domains},
      {"hook_radar.tsv", radar},
      {"report.json", report.to_json().dump(2) + "\n"},
  };
  for (const auto& [name, content] : files) {
    auto path = out_dir / name;
    try {
      write_file_atomic(path, content);
    } catch (const std::filesystem::filesystem_error& e) {
      throw OutputError("cannot write " + path.string() + ": " + e.what());
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace quotemix
