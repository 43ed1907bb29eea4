int main(int fd) {
    char buf[16];
    int total;
    int i;
    int n;
    total = 0;
    i = 0;
    while (i < 4) {
        n = read(fd, buf, 16); // source:a
        total = total + n;
        i = i + 1;
    }
    malloc(total); // sink:a
    exec(buf); // sink:a
    return total;
}
