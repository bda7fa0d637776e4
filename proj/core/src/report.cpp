#include "gameopt/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace gameopt {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    char* end = nullptr;
    if (std::strtod(buf, &end) == x && end != nullptr && *end == '\0') {
      return buf;
    }
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string format_complex(const std::complex<double>& z) {
  const double im = z.imag();
  std::string out = format_double(z.real());
  out += std::signbit(im) ? " - " : " + ";
  out += format_double(std::abs(im));
  out += "i";
  return out;
}

void write_report_line(std::ostream& os, const std::string& key, const std::string& value) {
  os << key << ": " << value << "\n";
}

void write_report_line(std::ostream& os, const std::string& key, double value) {
  write_report_line(os, key, format_double(value));
}

void write_report_line(std::ostream& os, const std::string& key, bool value) {
  write_report_line(os, key, std::string(value ? "true" : "false"));
}

void write_report_line(std::ostream& os, const std::string& key, long value) {
  write_report_line(os, key, std::to_string(value));
}

void write_spectrum_report(std::ostream& os, const SpectrumReport& report,
                           const std::string& prefix) {
  for (std::size_t k = 0; k < report.eigenvalues.size(); ++k) {
    write_report_line(os, prefix + ".eigenvalue." + std::to_string(k + 1),
                      format_complex(report.eigenvalues[k]));
  }
  write_report_line(os, prefix + ".hurwitz_stable", report.hurwitz_stable);
  if (report.gd_eta_bound.has_value()) {
    write_report_line(os, prefix + ".gd_eta_bound", *report.gd_eta_bound);
  } else {
    write_report_line(os, prefix + ".gd_eta_bound",
                      std::string(report.hurwitz_stable ? "unbounded" : "none"));
  }
  write_report_line(os, prefix + ".rk2_stable_flag", report.rk2_stable_flag);
  for (std::size_t k = 0; k < report.eg_continuous.size(); ++k) {
    const EgConditionRecord& rec = report.eg_continuous[k];
    write_report_line(os, prefix + ".eg_condition." + std::to_string(k + 1),
                      format_complex(rec.eigenvalue) +
                          " value=" + format_double(rec.condition_value) +
                          " satisfied=" + (rec.satisfied ? "true" : "false"));
  }
}

void write_certificate_report(std::ostream& os, const NECertificate& cert,
                              const std::string& prefix) {
  write_report_line(os, prefix + ".residual_inf", cert.residual_inf);
  write_report_line(os, prefix + ".stationary", cert.stationary);
  write_report_line(os, prefix + ".necessary_holds", cert.necessary_holds);
  write_report_line(os, prefix + ".sufficient_holds", cert.sufficient_holds);
  write_report_line(os, prefix + ".strict_holds", cert.strict_holds);
  for (std::size_t i = 0; i < cert.min_block_eigenvalues.size(); ++i) {
    write_report_line(os, prefix + ".min_block_eigenvalue." + std::to_string(i + 1),
                      cert.min_block_eigenvalues[i]);
  }
  write_report_line(os, prefix + ".min_symmetrized_eigenvalue",
                    cert.min_symmetrized_eigenvalue);
  write_report_line(os, prefix + ".tolerance", cert.tolerance);
}

}  // namespace gameopt
