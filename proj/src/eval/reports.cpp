#include <fstream>

#include "sslp/eval.hpp"

namespace sslp::eval {

namespace {
std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  SSLP_CHECK(out, "cannot open for writing: ", path);
  return out;
}
}  // namespace

void write_accuracy_csv(const std::string& path, const std::string& label,
                        const AccuracyReport& r) {
  std::ofstream out = open_out(path);
  out << "label,group,count,correct,accuracy_pct\n";
  out << label << ",overall," << r.total << "," << r.correct << "," << r.overall_pct << "\n";
  for (const GroupAccuracy& g : r.per_class)
    out << label << "," << g.key << "," << g.count << "," << g.correct << "," << g.pct() << "\n";
  for (const GroupAccuracy& g : r.per_combo)
    out << label << "," << g.key << "," << g.count << "," << g.correct << "," << g.pct() << "\n";
}

void write_pgd_csv(const std::string& path, const std::string& label, const PgdReport& r) {
  std::ofstream out = open_out(path);
  out << "label,epsilon,accuracy_pct\n";
  for (const PgdRow& row : r.rows)
    out << label << "," << row.epsilon << "," << row.accuracy_pct << "\n";
}

void write_corruption_csv(const std::string& path, const std::string& label,
                          const CorruptionReport& r) {
  std::ofstream out = open_out(path);
  out << "label,kind,group,severity,accuracy_pct\n";
  out << label << ",clean,clean,0," << r.clean_pct << "\n";
  for (const CorruptionRow& row : r.rows)
    out << label << "," << row.kind << "," << data::to_string(data::corruption_group(row.kind))
        << "," << row.severity << "," << row.accuracy_pct << "\n";
}

void write_scarcity_csv(const std::string& path, const std::string& label,
                        const ScarcityReport& r) {
  std::ofstream out = open_out(path);
  out << "label,fraction,accuracy_pct\n";
  for (const ScarcityRow& row : r.rows)
    out << label << "," << row.fraction << "," << row.accuracy_pct << "\n";
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

}  // namespace sslp::eval
