#pragma once

#include <vector>

#include "rfflab/common.hpp"
#include "rfflab/ofdm.hpp"
#include "rfflab/poly_basis.hpp"
#include "rfflab/separation.hpp"

namespace rfflab {

/// One received block-pilot frame split into its pilot and payload portions.
struct FrameCapture {
  TimeSeries pilot_rx;    // N + N_cp samples
  TimeSeries payload_rx;  // p (N + N_cp) samples, cyclic prefixes included
  FdSymbolVector pilot_fd;
  FrameSpec spec;

  /// Splits a full received frame of spec.frame_len() samples.
  static FrameCapture from_frame(const TimeSeries& rx, const FdSymbolVector& pilot_fd,
                                 const FrameSpec& spec);
  Index n_payload_symbols() const;
};

/// Time-domain pilot waveform (cyclic prefix included) at the frame drive level.
TimeSeries pilot_waveform(const FdSymbolVector& pilot_fd, const FrameSpec& spec);

struct PilotEstimate {
  LinearEstimate channel;
  Fingerprint fingerprint;
};

/// Hammerstein separation of the known pilot waveform against the received
/// pilot: channel h^_p for equalization and the baseline fingerprint b^_p.
PilotEstimate estimate_from_pilot(const FrameCapture& cap, const BasisConfig& cfg);

/// Soft (one-tap equalized) and judged payload symbols, one vector per
/// payload OFDM symbol.
struct EqualizedPayload {
  std::vector<CVector> soft;
  std::vector<FdSymbolVector> judged;
};

/// H^ = DFT_N(h^) (unnormalized), per payload symbol D = DFT(CP-stripped),
/// u^_e = D / H^, u^_f = hard decision. Throws SpectralNullError when some
/// |H^_k| < 1e-12 max |H^|.
EqualizedPayload equalize_and_demod(const FrameCapture& cap, const LinearEstimate& h_hat);

/// Re-modulates the judged payload symbols (with cyclic prefixes, at the
/// drive level) into the reference input of the payload regression.
TimeSeries regenerate_reference(const EqualizedPayload& eq, const FrameSpec& spec);

/// Payload-based fingerprint b^_u: separation of the regenerated reference
/// against the received payload samples. The known pilot tail is the
/// regression history of the first payload samples.
Fingerprint extract_payload_fingerprint(const FrameCapture& cap, const EqualizedPayload& eq,
                                        const BasisConfig& cfg);

/// Alternative combining: one separation per payload symbol, fingerprints
/// averaged coefficient-wise.
Fingerprint extract_payload_fingerprint_averaged(const FrameCapture& cap,
                                                 const EqualizedPayload& eq,
                                                 const BasisConfig& cfg);

struct Feature {
  double x = 0.0;  // Re b^_3
  double y = 0.0;  // Im b^_3
};

Feature feature_from_fingerprint(const Fingerprint& fp);

/// Replaces `fraction` of all judged symbols (chosen uniformly without
/// replacement) by a different QPSK point. Demodulation-error injection.
void inject_symbol_errors(EqualizedPayload& eq, double fraction, Seed seed);

/// Fraction of judged symbols that differ from `truth`.
double symbol_error_rate(const EqualizedPayload& eq, const std::vector<FdSymbolVector>& truth);

/// Full two-stage processing of one capture.
struct PipelineResult {
  PilotEstimate pilot;
  EqualizedPayload equalized;
  Fingerprint payload;
};

PipelineResult process_capture(const FrameCapture& cap, const BasisConfig& cfg,
                               bool average_per_symbol = false);

}  // namespace rfflab
