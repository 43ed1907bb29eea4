int main(int fd) {
    int n;
    char buf[16];
    n = read(fd, buf, 16); // source:a
    n = 10;
    malloc(n); // clean
    return 0;
}
