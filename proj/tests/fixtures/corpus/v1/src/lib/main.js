var text = require("./text");

function title(s) {
  return text.words(s).map(text.capitalize).join("");
}

function banner(s, width) {
  var line = title(s);
  return text.pad(line, width);
}

function count(s) {
  return text.words(s).length;
}

function summary(s) {
  var n = count(s);
  return n > 3 ? banner(s, 60) : title(s);
}

function run(args) {
  args.forEach(function (a) {
    console.log(summary(a));
  });
}

run(process.argv.slice(2));
