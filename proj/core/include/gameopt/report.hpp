#pragma once

#include "gameopt/equilibria.hpp"
#include "gameopt/stability.hpp"
#include "gameopt/types.hpp"

#include <ostream>
#include <string>

namespace gameopt {

/// Shortest decimal form that round-trips the double exactly ("%.17g" capped
/// at the shortest faithful length). All file and stdout numbers go through
/// this one function so reruns are byte-identical.
std::string format_double(double x);

std::string format_complex(const std::complex<double>& z);

/// key: value lines. Nested sections use dotted keys.
void write_report_line(std::ostream& os, const std::string& key, const std::string& value);
void write_report_line(std::ostream& os, const std::string& key, double value);
void write_report_line(std::ostream& os, const std::string& key, bool value);
void write_report_line(std::ostream& os, const std::string& key, long value);

/// Serializes spectrum + verdicts under the given key prefix.
void write_spectrum_report(std::ostream& os, const SpectrumReport& report,
                           const std::string& prefix);

/// Serializes a certificate under the given key prefix.
void write_certificate_report(std::ostream& os, const NECertificate& cert,
                              const std::string& prefix);

}  // namespace gameopt
