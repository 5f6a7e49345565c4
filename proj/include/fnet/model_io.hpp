#pragma once

#include <iosfwd>
#include <string>

#include "fnet/convtrain.hpp"
#include "fnet/learners.hpp"

namespace fnet {

/// Versioned flat text model files.
///
/// Layout: first line `fnet-model v1`, then `type <name>`, then one
/// `field value...` line per field (whitespace separated, numbers written
/// with full round-trip precision), closed by a line reading `end`.
/// Loaders are strict: unknown fields, missing fields, wrong counts, and
/// type mismatches all raise parse_error.

void save_model(std::ostream& out, const MarginModel& m);
void save_model(std::ostream& out, const PlattCalibrator& c);
void save_model(std::ostream& out, const SmoothnessClassifier& m);
void save_model(std::ostream& out, const MaskedConvNet& net);

MarginModel load_margin_model(std::istream& in);
PlattCalibrator load_platt_calibrator(std::istream& in);
SmoothnessClassifier load_smoothness_classifier(std::istream& in);
MaskedConvNet load_conv_net(std::istream& in);

template <typename Model>
void save_model_file(const std::string& path, const Model& m);

MarginModel load_margin_model_file(const std::string& path);
PlattCalibrator load_platt_calibrator_file(const std::string& path);
SmoothnessClassifier load_smoothness_classifier_file(const std::string& path);
MaskedConvNet load_conv_net_file(const std::string& path);

}  // namespace fnet
