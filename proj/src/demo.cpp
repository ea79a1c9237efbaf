#include "lipstab/demo.hpp"

#include "lipstab/errors.hpp"
#include "lipstab/random.hpp"
#include "lipstab/stability.hpp"

namespace lipstab {

SystemDocument demo_paper_example(int n_rows) {
  if (n_rows < 2) throw ValidationError("paper-example needs N >= 2");
  SystemDocument doc;
  doc.dimension = 2;
  for (int t = 1; t <= n_rows; ++t) {
    Vec a(2);
    a << (t % 2 == 0 ? t : -t), 0.0;
    doc.rows.push_back({"t=" + std::to_string(t), a, 1.0});
  }
  doc.rows.push_back({"t=0", Vec::Ones(2), 0.0});
  doc.truncation = "first " + std::to_string(n_rows) + " rows of (-1)^t t x1 <= 1, t = 1, 2, ...";
  return doc;
}

SystemDocument demo_convex_square() {
  SystemDocument doc;
  doc.dimension = 1;
  doc.convex.emplace();
  doc.convex->push_back(make_quadratic("f", Mat::Constant(1, 1, 2.0), Vec::Zero(1), 0.0));
  return doc;
}

SystemDocument demo_convex_square_shifted() {
  SystemDocument doc = demo_convex_square();
  std::get<Quadratic>(doc.convex->front().f).r = -1.0;
  return doc;
}

SystemDocument demo_random(int n, int m, std::uint64_t seed, int max_retries) {
  if (n < 1 || m < 1) throw ValidationError("random demo needs n >= 1 and m >= 1");
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Rng rng(stream_seed(seed, static_cast<std::uint64_t>(attempt)));
    SystemDocument doc;
    doc.dimension = n;
    for (int t = 1; t <= m; ++t) {
      Vec a = rng.normal_vector(n);
      doc.rows.push_back({"r" + std::to_string(t), std::move(a), rng.uniform(-0.5, 1.5)});
    }
    if (check_ssc(to_linear_system(doc)).holds) return doc;
  }
  throw RetryExhausted("no strong Slater instance after " + std::to_string(max_retries) + " draws");
}

std::vector<std::string> demo_names() {
  return {"paper-example", "convex-square", "convex-square-shifted", "random"};
}

}  // namespace lipstab
