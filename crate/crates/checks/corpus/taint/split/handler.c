int handler(char req[]) {
    exec(req); // sink:a
    return 0;
}
