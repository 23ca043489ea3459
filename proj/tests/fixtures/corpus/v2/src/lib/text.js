// String helpers shared by the command-line entry point.
function trim(s) {
  return s.replace(/^\s+|\s+$/g, "");
}

function pad(s, n) {
  while (s.length < n) {
    s = " " + s;
  }
  return s.slice(-n);
}

function words(s) {
  return trim(s).split(" ");
}

function capitalize(w) {
  return w.charAt(0).toUpperCase() + w.slice(1);
}

module.exports = { trim: trim, pad: pad, words: words, capitalize: capitalize };
